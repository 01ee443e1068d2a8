//! Experiment files, solver runs and their CSV artifacts, and benchmarks.

pub mod bench;
pub mod config;
pub mod run;

pub use bench::{bench, BenchReport, BenchRow, ScalingCheck};
pub use config::{load_config, ExperimentConfig, RunDescriptor};
pub use run::{run_experiment, run_single, RunOptions, RunSummary};

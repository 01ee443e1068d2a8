use clap::{Parser, Subcommand};
use iesc::cli_io::{bench, load_config, run_experiment, RunOptions};
use iesc::mie::{mie_far_field, sphere_solution};
use num_complex::Complex64;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "iesc",
    version,
    about = "Iterative equivalent-surface-current scattering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding `outputs.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fixed-order summation for bitwise-reproducible output.
        #[arg(long)]
        deterministic: bool,
    },
    /// Time the radiation kernel for every radius of a config.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the Lorenz–Mie amplitudes of a sphere as CSV.
    Mie {
        /// Radius in wavelengths.
        #[arg(long)]
        radius: f64,
        /// Relative permittivity of the sphere.
        #[arg(long)]
        eps: f64,
        /// Number of angles over [0°, 180°].
        #[arg(long)]
        angles: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> iesc::Result<()> {
    match cmd {
        Command::Run {
            config,
            out,
            deterministic,
        } => {
            let cfg = load_config(&config)?;
            let runs = run_experiment(&cfg, &RunOptions { out, deterministic })?;
            for r in runs {
                let h = &r.history;
                println!(
                    "R = {}: {} iterations, converged {}, final metric {:.3e}{}",
                    r.radius,
                    h.len(),
                    r.converged,
                    h.relative_metric(h.len() - 1),
                    r.forward_lobe_db
                        .map(|d| format!(", forward lobe {d:.3} dB"))
                        .unwrap_or_default()
                );
            }
            Ok(())
        }
        Command::Bench { config } => {
            let cfg = load_config(&config)?;
            print!("{}", bench(&cfg)?.table());
            Ok(())
        }
        Command::Mie {
            radius,
            eps,
            angles,
        } => {
            if angles < 2 {
                return Err(iesc::Error::InvalidArgument(
                    "need at least two angles".into(),
                ));
            }
            let sol = sphere_solution(radius, Complex64::new(eps, 0.0))?;
            log::info!(
                "x = {:.6}, n_max = {}, Q_ext = {:.10}, Q_sca = {:.10}",
                sol.size_parameter,
                sol.n_max(),
                sol.q_ext(),
                sol.q_sca()
            );
            let theta: Vec<f64> = (0..angles)
                .map(|i| std::f64::consts::PI * i as f64 / (angles - 1) as f64)
                .collect();
            println!("theta_deg,s1_re,s1_im,s2_re,s2_im,abs_s1_sq,abs_s2_sq");
            for (t, (s1, s2)) in theta.iter().zip(mie_far_field(&sol, &theta)) {
                println!(
                    "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                    t.to_degrees(),
                    s1.re,
                    s1.im,
                    s2.re,
                    s2.im,
                    s1.norm_sqr(),
                    s2.norm_sqr()
                );
            }
            Ok(())
        }
    }
}

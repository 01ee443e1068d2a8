//! Timing of the radiation kernel across a radius sweep.

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::iesc::{initial_currents, measure_deviation, observation_surfaces};
use crate::radiate::{radiate, Summation};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub radius: f64,
    pub nodes: usize,
    /// One exterior radiation call with fixed-order summation.
    pub radiate_ordered: f64,
    pub radiate_unordered: f64,
    /// Both radiation calls and the deviation of one solver pass.
    pub iteration: f64,
    /// Largest relative difference between the two summation orders.
    pub order_difference: f64,
}

/// Time ratio between consecutive rows against the node-count-squared ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingCheck {
    pub from: f64,
    pub to: f64,
    pub measured: f64,
    pub expected: f64,
}

impl ScalingCheck {
    pub fn within(&self, factor: f64) -> bool {
        let q = self.measured / self.expected;
        q <= factor && q >= 1.0 / factor
    }
}

/// Pairwise checks for `(radius, nodes, seconds)` samples in sweep order.
pub fn scaling_checks(samples: &[(f64, usize, f64)]) -> Vec<ScalingCheck> {
    samples
        .windows(2)
        .map(|w| ScalingCheck {
            from: w[0].0,
            to: w[1].0,
            measured: w[1].2 / w[0].2,
            expected: (w[1].1 as f64 / w[0].1 as f64).powi(2),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub scaling: Vec<ScalingCheck>,
}

impl BenchReport {
    pub fn table(&self) -> String {
        let mut s = String::from(
            "radius,nodes,radiate_ordered_s,radiate_unordered_s,iteration_s,order_rel_diff\n",
        );
        for r in &self.rows {
            s += &format!(
                "{},{},{:.4},{:.4},{:.4},{:e}\n",
                r.radius,
                r.nodes,
                r.radiate_ordered,
                r.radiate_unordered,
                r.iteration,
                r.order_difference
            );
        }
        for c in &self.scaling {
            s += &format!(
                "# R {} -> {}: time ratio {:.3}, (N ratio)^2 {:.3}, within 2x: {}\n",
                c.from,
                c.to,
                c.measured,
                c.expected,
                c.within(2.0)
            );
        }
        s
    }
}

/// Time one radiation call in each summation order and one solver pass for
/// every radius of `cfg`, using the physical-optics currents.
pub fn bench(cfg: &ExperimentConfig) -> Result<BenchReport> {
    let exterior = cfg.exterior();
    let interior = cfg.interior()?;
    let mut rows = Vec::new();
    for &radius in &cfg.radii {
        let mesh = Arc::new(cfg.mesh(radius)?);
        let source = cfg.source(radius)?;
        let inc = source.field(&mesh.nodes);
        let currents = initial_currents(mesh.clone(), &inc)?;
        let policy = cfg.solver.self_policy;
        let obs = observation_surfaces(&mesh, &policy)?;

        let t = Instant::now();
        let ordered = radiate(&currents, &exterior, &obs.0, &policy, Summation::Ordered)?;
        let radiate_ordered = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let unordered = radiate(&currents, &exterior, &obs.0, &policy, Summation::Unordered)?;
        let radiate_unordered = t.elapsed().as_secs_f64();

        let scale = ordered
            .e
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let order_difference = ordered
            .e
            .iter()
            .zip(&unordered.e)
            .map(|(a, b)| (*a - *b).norm() / scale)
            .fold(0.0, f64::max);

        let mut solver = cfg.solver;
        solver.summation = Summation::Ordered;
        let t = Instant::now();
        measure_deviation(&currents, &inc, &obs, &exterior, &interior, &solver)?;
        let iteration = t.elapsed().as_secs_f64();

        log::info!(
            "bench R = {radius}: N = {}, radiate {radiate_ordered:.3}s / {radiate_unordered:.3}s, pass {iteration:.3}s",
            mesh.len()
        );
        rows.push(BenchRow {
            radius,
            nodes: mesh.len(),
            radiate_ordered,
            radiate_unordered,
            iteration,
            order_difference,
        });
    }
    let samples: Vec<_> = rows
        .iter()
        .map(|r| (r.radius, r.nodes, r.radiate_ordered))
        .collect();
    Ok(BenchReport {
        scaling: scaling_checks(&samples),
        rows,
    })
}

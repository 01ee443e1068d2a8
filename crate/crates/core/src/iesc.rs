//! The iterative equivalent-surface-current loop.
//!
//! Starting from the physical-optics currents `J = n̂ × H^i`, `M = E^i × n̂`,
//! each pass radiates the currents to both sides of the surface, measures the
//! tangential field discontinuity and corrects the currents with the
//! impedance-averaged local plane-wave relation:
//!
//! ```text
//! δJ = (I − n̂n̂)·δE / ½(η⁺ + η⁻)
//! δM = (I − n̂n̂)·δH / ½(1/η⁺ + 1/η⁻)
//! ```
//!
//! The exterior field is radiated by (J, M) in the exterior medium; the
//! interior field by the inward-facing pair (−J, −M) in the interior medium.

use crate::error::{Error, Result};
use crate::geometry::{offset_points, Side, SurfaceMesh};
use crate::greens::Medium;
use crate::incident::Source;
use crate::radiate::{
    deviation, radiate, FieldPair, SelfTermMode, SelfTermPolicy, Summation, SurfaceCurrents,
};
use crate::spectral::SphereFilter;
use crate::vector::{CVec3, Vec3};
use num_complex::Complex64;
use std::sync::Arc;
use std::time::Instant;

/// Consecutive metric increases that abort the iteration.
pub const DIVERGENCE_WINDOW: usize = 3;

/// Degree taper for corrections on sphere meshes, in multiples of `k⁺ R`.
///
/// Degrees up to `ceil(pass · k⁺R)` are applied in full; the weight then
/// falls along a raised cosine to zero at `ceil(stop · k⁺R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandLimit {
    pub pass: f64,
    pub stop: f64,
}

impl Default for BandLimit {
    fn default() -> Self {
        Self {
            pass: 0.2,
            stop: 0.7,
        }
    }
}

impl BandLimit {
    pub fn validate(&self) -> Result<()> {
        if !(self.pass > 0.0
            && self.pass.is_finite()
            && self.stop >= self.pass
            && self.stop.is_finite())
        {
            return Err(Error::invalid(format!(
                "band limit needs 0 < pass <= stop, got pass {} stop {}",
                self.pass, self.stop
            )));
        }
        Ok(())
    }

    /// Filter for `mesh` and exterior wavenumber `k`.
    pub fn filter(&self, mesh: &SurfaceMesh, k: f64) -> Result<SphereFilter> {
        self.validate()?;
        let pass = SphereFilter::degree_for(mesh, k, self.pass)?;
        let stop = SphereFilter::degree_for(mesh, k, self.stop)?;
        SphereFilter::raised_cosine(mesh, pass, stop)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once the metric has dropped to `tol` times its first value.
    pub tol: f64,
    pub relaxation: f64,
    /// `+1` applies `J ← J + δJ`; `−1` flips the update for experiments.
    pub update_sign: f64,
    pub self_policy: SelfTermPolicy,
    pub record_maps: bool,
    pub summation: Summation,
    /// Spectral taper applied to every correction; `None` applies the
    /// corrections unfiltered.
    pub band_limit: Option<BandLimit>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 10,
            tol: 1e-4,
            relaxation: 1.0,
            update_sign: 1.0,
            self_policy: SelfTermPolicy::default(),
            record_maps: false,
            summation: Summation::Ordered,
            band_limit: Some(BandLimit::default()),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::invalid(format!(
                "relaxation must lie in (0, 1], got {}",
                self.relaxation
            )));
        }
        if let Some(b) = &self.band_limit {
            b.validate()?;
        }
        if self.update_sign != 1.0 && self.update_sign != -1.0 {
            return Err(Error::invalid("update_sign must be +1 or -1"));
        }
        self.self_policy.validate()
    }
}

/// Deviation statistics of one pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 1-based pass number.
    pub iteration: usize,
    /// `max |δJ_x|, max |δJ_y|, max |δJ_z|` over the nodes.
    pub max_abs_dj: [f64; 3],
    pub max_abs_dm: [f64; 3],
    /// Area-weighted L2 norm of each component.
    pub l2_dj: [f64; 3],
    pub l2_dm: [f64; 3],
    /// `‖P δE‖ / ‖P δH‖`, compared against the impedance average in logs.
    pub deviation_impedance: f64,
    pub wall_seconds: f64,
    /// Seconds spent in the two radiation calls.
    pub radiate_seconds: f64,
}

impl IterationRecord {
    pub fn l2_dj_total(&self) -> f64 {
        self.l2_dj.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn l2_dm_total(&self) -> f64 {
        self.l2_dm.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn linf_j(&self) -> f64 {
        self.max_abs_dj.iter().cloned().fold(0.0, f64::max)
    }

    fn linf_m(&self) -> f64 {
        self.max_abs_dm.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceHistory {
    pub records: Vec<IterationRecord>,
}

impl ConvergenceHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `max |δJ_x|` per pass.
    pub fn max_abs_djx(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.max_abs_dj[0]).collect()
    }

    /// `max |δM_y|` per pass.
    pub fn max_abs_dmy(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.max_abs_dm[1]).collect()
    }

    /// Stopping metric of pass `idx` (0-based): the larger of the L∞ norms of
    /// δJ and δM relative to the first pass. Zero when the first pass was.
    pub fn relative_metric(&self, idx: usize) -> f64 {
        let first = &self.records[0];
        let cur = &self.records[idx];
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
        ratio(cur.linf_j(), first.linf_j()).max(ratio(cur.linf_m(), first.linf_m()))
    }
}

/// Per-pass current corrections kept when `record_maps` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationMap {
    pub iteration: usize,
    pub dj: Vec<CVec3>,
    pub dm: Vec<CVec3>,
}

#[derive(Debug, Clone)]
pub struct IterateOutput {
    pub currents: SurfaceCurrents,
    pub history: ConvergenceHistory,
    pub maps: Vec<DeviationMap>,
    pub converged: bool,
}

/// Physical-optics starting currents `J = n̂ × H^i`, `M = E^i × n̂`.
pub fn initial_currents(mesh: Arc<SurfaceMesh>, inc: &FieldPair) -> Result<SurfaceCurrents> {
    if inc.e.len() != mesh.len() || inc.h.len() != mesh.len() {
        return Err(Error::invalid(format!(
            "incident field has {} samples for {} nodes",
            inc.e.len(),
            mesh.len()
        )));
    }
    let j = mesh
        .normals
        .iter()
        .zip(&inc.h)
        .map(|(&n, &h)| CVec3::real_cross(n, h))
        .collect();
    let m = mesh
        .normals
        .iter()
        .zip(&inc.e)
        .map(|(&n, &e)| e.cross_real(n))
        .collect();
    SurfaceCurrents::new(mesh, j, m)
}

/// `v − n̂(n̂·v)`.
#[inline]
pub fn tangential_project(v: CVec3, n: Vec3) -> CVec3 {
    let nv = v.dot_real(n);
    CVec3::new(v.x - nv * n.x, v.y - nv * n.y, v.z - nv * n.z)
}

/// Prefactors `(2/(η⁺+η⁻), 2η⁺η⁻/(η⁺+η⁻))` applied to the projected E and H
/// deviations.
pub fn correction_factors(
    eta_plus: Complex64,
    eta_minus: Complex64,
) -> Result<(Complex64, Complex64)> {
    for (name, eta) in [("eta_plus", eta_plus), ("eta_minus", eta_minus)] {
        if !(eta.re > 0.0) || !eta.is_finite() {
            return Err(Error::invalid(format!(
                "{name} must have positive real part, got {eta}"
            )));
        }
    }
    let avg_z = 0.5 * (eta_plus + eta_minus);
    let avg_y = 0.5 * (1.0 / eta_plus + 1.0 / eta_minus);
    Ok((1.0 / avg_z, 1.0 / avg_y))
}

/// Tangential current corrections for the deviations `dev_e`, `dev_h`.
pub fn correction(
    dev_e: &[CVec3],
    dev_h: &[CVec3],
    normals: &[Vec3],
    eta_plus: Complex64,
    eta_minus: Complex64,
) -> Result<(Vec<CVec3>, Vec<CVec3>)> {
    if dev_e.len() != normals.len() || dev_h.len() != normals.len() {
        return Err(Error::invalid(
            "deviation and normal arrays differ in length",
        ));
    }
    let (fj, fm) = correction_factors(eta_plus, eta_minus)?;
    let dj = dev_e
        .iter()
        .zip(normals)
        .map(|(&e, &n)| tangential_project(e, n).scale(fj))
        .collect();
    let dm = dev_h
        .iter()
        .zip(normals)
        .map(|(&h, &n)| tangential_project(h, n).scale(fm))
        .collect();
    Ok((dj, dm))
}

/// Add `factor · (δJ, δM)` to the currents in place.
///
/// Exactly-zero corrections are skipped so a deviation-free state keeps its
/// bits (including signed zeros).
pub fn apply_update(currents: &mut SurfaceCurrents, dj: &[CVec3], dm: &[CVec3], factor: f64) {
    let pairs = currents
        .j
        .iter_mut()
        .zip(dj)
        .chain(currents.m.iter_mut().zip(dm));
    for (x, d) in pairs {
        if *d != CVec3::ZERO {
            *x += *d * factor;
        }
    }
}

fn record_for(
    iteration: usize,
    mesh: &SurfaceMesh,
    dj: &[CVec3],
    dm: &[CVec3],
    dev: &FieldPair,
) -> IterationRecord {
    let mut max_j = [0.0f64; 3];
    let mut max_m = [0.0f64; 3];
    let mut l2_j = [0.0f64; 3];
    let mut l2_m = [0.0f64; 3];
    let (mut pe, mut ph) = (0.0, 0.0);
    for k in 0..mesh.len() {
        let w = mesh.weights[k];
        for (c, v) in dj[k].components().iter().enumerate() {
            max_j[c] = max_j[c].max(v.norm());
            l2_j[c] += w * v.norm_sqr();
        }
        for (c, v) in dm[k].components().iter().enumerate() {
            max_m[c] = max_m[c].max(v.norm());
            l2_m[c] += w * v.norm_sqr();
        }
        let n = mesh.normals[k];
        pe += w * tangential_project(dev.e[k], n).norm_sqr();
        ph += w * tangential_project(dev.h[k], n).norm_sqr();
    }
    IterationRecord {
        iteration,
        max_abs_dj: max_j,
        max_abs_dm: max_m,
        l2_dj: l2_j.map(f64::sqrt),
        l2_dm: l2_m.map(f64::sqrt),
        deviation_impedance: if ph > 0.0 { (pe / ph).sqrt() } else { 0.0 },
        wall_seconds: 0.0,
        radiate_seconds: 0.0,
    }
}

/// Observation points for the exterior and interior evaluations.
pub fn observation_surfaces(
    mesh: &SurfaceMesh,
    policy: &SelfTermPolicy,
) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    match policy.mode {
        SelfTermMode::OffsetSurfaces => Ok((
            offset_points(mesh, Side::Plus, policy.offset)?,
            offset_points(mesh, Side::Minus, policy.offset)?,
        )),
        SelfTermMode::ExcludeSelf => Ok((mesh.nodes.clone(), mesh.nodes.clone())),
    }
}

/// Boundary deviation of `currents` against the incident field `inc` sampled
/// at the nodes.
pub fn measure_deviation(
    currents: &SurfaceCurrents,
    inc: &FieldPair,
    obs: &(Vec<Vec3>, Vec<Vec3>),
    exterior: &Medium,
    interior: &Medium,
    cfg: &SolverConfig,
) -> Result<FieldPair> {
    let plus = radiate(currents, exterior, &obs.0, &cfg.self_policy, cfg.summation)?;
    let minus = radiate(
        &currents.negated(),
        interior,
        &obs.1,
        &cfg.self_policy,
        cfg.summation,
    )?;
    deviation(inc, &plus, &minus)
}

/// Run the correction loop to convergence, `max_iters`, or divergence.
pub fn iterate(
    mesh: Arc<SurfaceMesh>,
    source: &Source,
    exterior: &Medium,
    interior: &Medium,
    cfg: &SolverConfig,
) -> Result<IterateOutput> {
    cfg.validate()?;
    let inc = source.field(&mesh.nodes);
    let mut currents = initial_currents(mesh.clone(), &inc)?;
    let obs = observation_surfaces(&mesh, &cfg.self_policy)?;
    let step = cfg.update_sign * cfg.relaxation;
    let (fj, fm) = correction_factors(exterior.impedance, interior.impedance)?;
    let filter = match &cfg.band_limit {
        Some(b) => Some(b.filter(&mesh, exterior.wavenumber.re)?),
        None => None,
    };
    log::debug!(
        "iesc: {} nodes, offset {}, prefactors {fj:.6e} / {fm:.6e}",
        mesh.len(),
        cfg.self_policy.offset
    );

    let mut history = ConvergenceHistory::default();
    let mut maps = Vec::new();
    let mut converged = false;
    let mut rising = 0usize;

    for it in 1..=cfg.max_iters {
        let start = Instant::now();
        let dev = measure_deviation(&currents, &inc, &obs, exterior, interior, cfg)?;
        let radiate_seconds = start.elapsed().as_secs_f64();
        let (mut dj, mut dm) = correction(
            &dev.e,
            &dev.h,
            &mesh.normals,
            exterior.impedance,
            interior.impedance,
        )?;
        if let Some(f) = &filter {
            let raw = record_for(it, &mesh, &dj, &dm, &dev);
            dj = f.apply_tangential(&dj, &mesh.normals);
            dm = f.apply_tangential(&dm, &mesh.normals);
            log::debug!(
                "iter {it}: unfiltered max|dJx| {:.4e} l2 dJ {:.4e}",
                raw.max_abs_dj[0],
                raw.l2_dj_total()
            );
        }
        let mut rec = record_for(it, &mesh, &dj, &dm, &dev);
        apply_update(&mut currents, &dj, &dm, step);
        rec.radiate_seconds = radiate_seconds;
        rec.wall_seconds = start.elapsed().as_secs_f64();
        history.records.push(rec);
        if cfg.record_maps {
            maps.push(DeviationMap {
                iteration: it,
                dj,
                dm,
            });
        }

        let idx = history.len() - 1;
        let metric = history.relative_metric(idx);
        log::info!(
            "iter {it}: max|dJx| {:.4e} max|dMy| {:.4e} rel {:.3e} |dE|/|dH| {:.2} ({:.1}s)",
            rec.max_abs_dj[0],
            rec.max_abs_dm[1],
            metric,
            rec.deviation_impedance,
            rec.wall_seconds
        );

        if idx == 0 {
            if rec.linf_j() == 0.0 && rec.linf_m() == 0.0 {
                converged = true;
                break;
            }
        } else {
            if metric <= cfg.tol {
                converged = true;
                break;
            }
            if metric > history.relative_metric(idx - 1) {
                rising += 1;
                if rising >= DIVERGENCE_WINDOW {
                    return Err(Error::Divergence { history });
                }
            } else {
                rising = 0;
            }
        }
    }

    Ok(IterateOutput {
        currents,
        history,
        maps,
        converged,
    })
}

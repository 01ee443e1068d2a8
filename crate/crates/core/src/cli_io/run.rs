//! Solver runs and their CSV artifacts.

use super::config::{ExperimentConfig, RunDescriptor};
use crate::error::{Error, Result};
use crate::geometry::SurfaceMesh;
use crate::iesc::{iterate, ConvergenceHistory, DeviationMap, IterateOutput};
use crate::incident::Source;
use crate::mie::{
    compare_run, lobe_edge, sphere_solution, FarFieldSample, MieSolution, ScatterPlane,
};
use crate::radiate::Summation;
use crate::vector::CVec3;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const CONVERGENCE_HEADER: [&str; 10] = [
    "iteration",
    "max_abs_dJx",
    "max_abs_dJy",
    "max_abs_dJz",
    "max_abs_dMx",
    "max_abs_dMy",
    "max_abs_dMz",
    "l2_dJ",
    "l2_dM",
    "wall_seconds",
];

/// Component names used in map file names.
pub const MAP_COMPONENTS: [&str; 6] = ["dJx", "dJy", "dJz", "dMx", "dMy", "dMz"];

/// Angular samples of the Mie reference used to locate the lobe edges.
const NULL_SEARCH_SAMPLES: usize = 20_000;

/// Depth of the compared forward lobe below its peak. Intensities near a
/// null differ by arbitrarily many dB for a small shift of the null.
pub const LOBE_FLOOR_DB: f64 = 10.0;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `outputs.directory`.
    pub out: Option<PathBuf>,
    /// Forces fixed-order summation.
    pub deterministic: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub radius: f64,
    pub nodes: usize,
    pub directory: PathBuf,
    pub history: ConvergenceHistory,
    pub converged: bool,
    /// Largest |iESC − Mie| in dB over the forward lobe of both planes.
    pub forward_lobe_db: Option<f64>,
    /// Narrower of the two forward-lobe edges, in radians.
    pub forward_lobe_edge: Option<f64>,
}

/// Run every descriptor of `cfg`. Each run writes its artifacts before the
/// next starts; the first failure is returned after all runs have finished.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<RunSummary>> {
    let mut cfg = cfg.clone();
    if opts.deterministic {
        cfg.solver.summation = Summation::Ordered;
    }
    let mut out = Vec::new();
    let mut first_err = None;
    for desc in cfg.runs(opts.out.as_deref()) {
        match run_single(&cfg, &desc) {
            Ok(s) => out.push(s),
            Err(e) => {
                log::error!("run R = {}: {e}", desc.radius);
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// One solver run. On divergence the partial history is written and the
/// divergence error returned.
pub fn run_single(cfg: &ExperimentConfig, desc: &RunDescriptor) -> Result<RunSummary> {
    fs::create_dir_all(&desc.directory)?;
    let mesh = Arc::new(cfg.mesh(desc.radius)?);
    let source = cfg.source(desc.radius)?;
    let exterior = cfg.exterior();
    let interior = cfg.interior()?;

    let mut log = run_log_header(cfg, desc, &mesh);
    log::info!(
        "R = {} λ: {} nodes, grid {:?}, offset {}",
        desc.radius,
        mesh.len(),
        mesh.grid_shape,
        cfg.solver.self_policy.offset
    );
    for d in &cfg.defaulted {
        log::info!("default {d}");
    }

    let result = iterate(mesh.clone(), &source, &exterior, &interior, &cfg.solver);
    let run = match result {
        Ok(run) => run,
        Err(Error::Divergence { history }) => {
            write_convergence(&desc.directory.join("convergence.csv"), &history)?;
            append_history(&mut log, &history);
            let _ = writeln!(log, "status = \"diverged\"");
            fs::write(desc.directory.join("run.log"), &log)?;
            return Err(Error::Divergence { history });
        }
        Err(e) => {
            let _ = writeln!(log, "status = \"failed: {e}\"");
            fs::write(desc.directory.join("run.log"), &log)?;
            return Err(e);
        }
    };

    write_convergence(&desc.directory.join("convergence.csv"), &run.history)?;
    for map in &run.maps {
        write_maps(&desc.directory, &mesh, map)?;
    }
    append_history(&mut log, &run.history);
    let _ = writeln!(log, "converged = {}", run.converged);

    let mut summary = RunSummary {
        radius: desc.radius,
        nodes: mesh.len(),
        directory: desc.directory.clone(),
        history: run.history.clone(),
        converged: run.converged,
        forward_lobe_db: None,
        forward_lobe_edge: None,
    };
    if let (Source::Plane(wave), true) = (&source, cfg.farfield) {
        match far_field_tables(cfg, desc, &run, wave) {
            Ok((edge, worst)) => {
                let _ = writeln!(log, "forward_lobe_edge_deg = {}", edge.to_degrees());
                let _ = writeln!(log, "forward_lobe_max_abs_db = {worst}");
                log::info!(
                    "forward lobe (θ < {:.2}°): max |Δ| = {worst:.3} dB",
                    edge.to_degrees()
                );
                summary.forward_lobe_edge = Some(edge);
                summary.forward_lobe_db = Some(worst);
            }
            Err(e) => {
                log::warn!("far-field comparison skipped: {e}");
                let _ = writeln!(log, "farfield = \"skipped: {e}\"");
            }
        }
    }
    fs::write(desc.directory.join("run.log"), &log)?;
    Ok(summary)
}

fn run_log_header(cfg: &ExperimentConfig, desc: &RunDescriptor, mesh: &SurfaceMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# iesc {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "radius = {}", desc.radius);
    let _ = writeln!(s, "nodes = {}", mesh.len());
    let _ = writeln!(s, "grid = [{}, {}]", mesh.grid_shape.0, mesh.grid_shape.1);
    let _ = writeln!(s, "offset = {}", cfg.solver.self_policy.offset);
    let _ = writeln!(s, "summation = \"{:?}\"", cfg.solver.summation);
    for d in &cfg.defaulted {
        let _ = writeln!(s, "# default: {d}");
    }
    let _ = writeln!(s, "\n# effective config\n{}", cfg.file.to_toml());
    s
}

fn append_history(log: &mut String, history: &ConvergenceHistory) {
    for (i, r) in history.records.iter().enumerate() {
        let _ = writeln!(
            log,
            "# iter {}: max|dJx| {:e} max|dMy| {:e} rel {:e} {:.3}s",
            r.iteration,
            r.max_abs_dj[0],
            r.max_abs_dm[1],
            history.relative_metric(i),
            r.wall_seconds
        );
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_convergence(path: &Path, history: &ConvergenceHistory) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(CONVERGENCE_HEADER).map_err(csv_err)?;
    for r in &history.records {
        let mut row = vec![r.iteration.to_string()];
        row.extend(r.max_abs_dj.iter().chain(&r.max_abs_dm).map(|&v| num(v)));
        row.push(num(r.l2_dj_total()));
        row.push(num(r.l2_dm_total()));
        row.push(num(r.wall_seconds));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Six `(θ, φ)` grids per pass, one row per node in grid order.
pub fn write_maps(dir: &Path, mesh: &SurfaceMesh, map: &DeviationMap) -> Result<()> {
    let fields: [&[CVec3]; 2] = [&map.dj, &map.dm];
    for (c, name) in MAP_COMPONENTS.iter().enumerate() {
        let path = dir.join(format!("dev_iter{}_{name}.csv", map.iteration));
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["i_theta", "i_phi", "theta", "phi", "re", "im", "abs"])
            .map_err(csv_err)?;
        let field = fields[c / 3];
        for (k, v) in field.iter().enumerate() {
            let (it, ip) = mesh.grid_index(k);
            let z = v.components()[c % 3];
            w.write_record([
                it.to_string(),
                ip.to_string(),
                num(mesh.theta()[it]),
                num(mesh.phi()[ip]),
                num(z.re),
                num(z.im),
                num(z.norm()),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn plane_name(p: ScatterPlane) -> &'static str {
    match p {
        ScatterPlane::E => "E",
        ScatterPlane::H => "H",
    }
}

/// Writes `farfield.csv` and `mie_compare.csv`; returns the forward-lobe
/// edge and the largest absolute dB difference inside it.
fn far_field_tables(
    cfg: &ExperimentConfig,
    desc: &RunDescriptor,
    run: &IterateOutput,
    wave: &crate::incident::PlaneWave,
) -> Result<(f64, f64)> {
    let sol = sphere_solution(desc.radius, cfg.eps_rel_interior)?;
    let n = cfg.angles;
    let angles: Vec<f64> = (0..n)
        .map(|i| std::f64::consts::PI * i as f64 / (n - 1) as f64)
        .collect();
    let samples = compare_run(run, &cfg.exterior(), wave, &sol, &angles)?;
    let edges = ForwardLobe::of(&sol);
    write_far_field(&desc.directory, &samples, &edges)?;
    Ok((edges.e.min(edges.h), edges.max_abs_db(&samples)))
}

/// Main forward lobe of the series in each principal plane, down to
/// [`LOBE_FLOOR_DB`] below the forward intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardLobe {
    pub e: f64,
    pub h: f64,
}

impl ForwardLobe {
    pub fn of(sol: &MieSolution) -> Self {
        let floor = 10f64.powf(-LOBE_FLOOR_DB / 10.0);
        Self {
            e: lobe_edge(sol, ScatterPlane::E, floor, NULL_SEARCH_SAMPLES),
            h: lobe_edge(sol, ScatterPlane::H, floor, NULL_SEARCH_SAMPLES),
        }
    }

    pub fn contains(&self, s: &FarFieldSample) -> bool {
        s.theta
            < match s.plane {
                ScatterPlane::E => self.e,
                ScatterPlane::H => self.h,
            }
    }

    /// Largest `|diff_db|` over the samples inside the lobe.
    pub fn max_abs_db(&self, samples: &[FarFieldSample]) -> f64 {
        samples
            .iter()
            .filter(|s| self.contains(s))
            .map(|s| s.diff_db.abs())
            .fold(0.0, f64::max)
    }
}

pub fn write_far_field(dir: &Path, samples: &[FarFieldSample], lobe: &ForwardLobe) -> Result<()> {
    let mut ff = csv::Writer::from_path(dir.join("farfield.csv")).map_err(csv_err)?;
    ff.write_record(["theta_deg", "plane", "intensity_iesc", "intensity_mie"])
        .map_err(csv_err)?;
    let mut cmp = csv::Writer::from_path(dir.join("mie_compare.csv")).map_err(csv_err)?;
    cmp.write_record(["theta_deg", "plane", "diff_db", "forward_lobe"])
        .map_err(csv_err)?;
    for s in samples {
        let deg = num(s.theta.to_degrees());
        let plane = plane_name(s.plane);
        ff.write_record([deg.clone(), plane.into(), num(s.iesc), num(s.mie)])
            .map_err(csv_err)?;
        cmp.write_record([
            deg,
            plane.into(),
            num(s.diff_db),
            u8::from(lobe.contains(s)).to_string(),
        ])
        .map_err(csv_err)?;
    }
    ff.flush()?;
    cmp.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidState(format!("csv: {other:?}")),
    }
}

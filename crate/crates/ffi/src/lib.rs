//! C interface to the iesc solver.
//!
//! Objects are opaque handles created by `*_new` functions and released by
//! the matching `*_free`. Every fallible call returns an [`IescStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`iesc_last_error_message`].

use iesc::cli_io::{load_config, run_experiment, RunOptions};
use iesc::geometry::{make_sphere_mesh, SurfaceMesh};
use iesc::greens::Medium;
use iesc::iesc::{iterate, BandLimit, ConvergenceHistory, IterationRecord, SolverConfig};
use iesc::incident::{GaussianBeam, PlaneWave, Source};
use iesc::mie::{mie_far_field, sphere_solution};
use iesc::radiate::{SelfTermPolicy, Summation, SurfaceCurrents};
use iesc::vector::{CVec3, Vec3};
use iesc::Error;
use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IescStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateOffset = 3,
    Singularity = 4,
    Capacity = 5,
    /// The run diverged; its partial history is still returned.
    Divergence = 6,
    InvalidState = 7,
    Config = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IescSourceKind {
    PlaneWave = 0,
    GaussianBeam = 1,
}

/// Incident field. `focus` is used by the Gaussian beam only.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IescSource {
    pub kind: IescSourceKind,
    pub amplitude: f64,
    pub direction: [f64; 3],
    pub polarization: [f64; 3],
    pub waist: f64,
    pub focus: [f64; 3],
}

/// Solver settings; start from [`iesc_solver_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IescSolverOptions {
    pub max_iters: u32,
    pub tol: f64,
    pub relaxation: f64,
    pub offset: f64,
    /// Non-zero enables the degree taper of the corrections.
    pub band_limit: c_int,
    pub band_pass: f64,
    pub band_stop: f64,
    /// Non-zero selects fixed-order summation.
    pub deterministic: c_int,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IescIterationRecord {
    pub iteration: u32,
    pub max_abs_dj: [f64; 3],
    pub max_abs_dm: [f64; 3],
    pub l2_dj: f64,
    pub l2_dm: f64,
    pub relative_metric: f64,
    pub wall_seconds: f64,
}

/// A surface discretization.
pub struct IescMesh(Arc<SurfaceMesh>);

/// Result of a solver run.
pub struct IescRun {
    history: ConvergenceHistory,
    currents: Option<SurfaceCurrents>,
    converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> IescStatus {
    match e {
        Error::InvalidArgument(_) => IescStatus::InvalidArgument,
        Error::DegenerateOffset { .. } => IescStatus::DegenerateOffset,
        Error::Singularity(_) => IescStatus::Singularity,
        Error::Capacity { .. } => IescStatus::Capacity,
        Error::Divergence { .. } => IescStatus::Divergence,
        Error::InvalidState(_) => IescStatus::InvalidState,
        Error::Config { .. } => IescStatus::Config,
        Error::Io(_) => IescStatus::Io,
    }
}

fn fail(e: Error) -> IescStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null_arg(name: &str) -> IescStatus {
    set_error(&format!("null pointer: {name}"));
    IescStatus::NullPointer
}

fn guard(f: impl FnOnce() -> IescStatus) -> IescStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            IescStatus::Panic
        }
    }
}

/// Message of the last failed call on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn iesc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn iesc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Sphere of `radius` wavelengths sampled at `density` nodes per wavelength.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iesc_sphere_mesh_new(
    radius: f64,
    density: f64,
    out: *mut *mut IescMesh,
) -> IescStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match make_sphere_mesh(radius, density) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(IescMesh(Arc::new(m))));
                IescStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `mesh` must come from [`iesc_sphere_mesh_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn iesc_mesh_free(mesh: *mut IescMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Number of nodes; zero for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn iesc_mesh_len(mesh: *const IescMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.len())
}

/// # Safety
/// `mesh` must be a live handle; `n_theta` and `n_phi` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iesc_mesh_grid_shape(
    mesh: *const IescMesh,
    n_theta: *mut usize,
    n_phi: *mut usize,
) -> IescStatus {
    let Some(m) = mesh.as_ref() else {
        return null_arg("mesh");
    };
    if n_theta.is_null() || n_phi.is_null() {
        return null_arg("shape output");
    }
    (*n_theta, *n_phi) = m.0.grid_shape;
    IescStatus::Ok
}

/// Node positions as `3 * len` doubles.
///
/// # Safety
/// `mesh` must be a live handle and `xyz` valid for `3 * len` writes.
#[no_mangle]
pub unsafe extern "C" fn iesc_mesh_nodes(
    mesh: *const IescMesh,
    xyz: *mut f64,
    len: usize,
) -> IescStatus {
    let Some(m) = mesh.as_ref() else {
        return null_arg("mesh");
    };
    if xyz.is_null() {
        return null_arg("xyz");
    }
    if len != m.0.len() {
        return fail(Error::InvalidArgument(format!(
            "buffer for {len} nodes, mesh has {}",
            m.0.len()
        )));
    }
    let out = std::slice::from_raw_parts_mut(xyz, 3 * len);
    for (chunk, p) in out.chunks_exact_mut(3).zip(&m.0.nodes) {
        chunk.copy_from_slice(&p.to_array());
    }
    IescStatus::Ok
}

#[no_mangle]
pub extern "C" fn iesc_solver_options_default() -> IescSolverOptions {
    let d = SolverConfig::default();
    let b = BandLimit::default();
    IescSolverOptions {
        max_iters: d.max_iters as u32,
        tol: d.tol,
        relaxation: d.relaxation,
        offset: d.self_policy.offset,
        band_limit: 1,
        band_pass: b.pass,
        band_stop: b.stop,
        deterministic: 1,
    }
}

fn solver_config(o: &IescSolverOptions) -> iesc::Result<SolverConfig> {
    let cfg = SolverConfig {
        max_iters: o.max_iters as usize,
        tol: o.tol,
        relaxation: o.relaxation,
        self_policy: SelfTermPolicy::offset_surfaces(o.offset)?,
        band_limit: (o.band_limit != 0).then_some(BandLimit {
            pass: o.band_pass,
            stop: o.band_stop,
        }),
        summation: if o.deterministic != 0 {
            Summation::Ordered
        } else {
            Summation::Unordered
        },
        ..SolverConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn source(s: &IescSource, background: &Medium) -> iesc::Result<Source> {
    let amp = Complex64::new(s.amplitude, 0.0);
    let dir = Vec3::from_array(s.direction);
    let pol = Vec3::from_array(s.polarization);
    Ok(match s.kind {
        IescSourceKind::PlaneWave => Source::Plane(PlaneWave::new(amp, dir, pol, background)?),
        IescSourceKind::GaussianBeam => Source::Gaussian(GaussianBeam::new(
            s.waist,
            Vec3::from_array(s.focus),
            dir,
            pol,
            amp,
            background,
        )?),
    })
}

/// Iterate the surface currents on `mesh` for a body of relative
/// permittivity `eps_re + j eps_im` in vacuum.
///
/// On success and on [`IescStatus::Divergence`] a run handle is written to
/// `out`; after divergence it carries the partial history and no currents.
///
/// # Safety
/// `mesh` must be a live handle, `src` and `opts` valid reads, `out` a valid
/// write.
#[no_mangle]
pub unsafe extern "C" fn iesc_run_new(
    mesh: *const IescMesh,
    src: *const IescSource,
    eps_re: f64,
    eps_im: f64,
    opts: *const IescSolverOptions,
    out: *mut *mut IescRun,
) -> IescStatus {
    guard(|| {
        let Some(mesh) = mesh.as_ref() else {
            return null_arg("mesh");
        };
        let Some(src) = src.as_ref() else {
            return null_arg("src");
        };
        let Some(opts) = opts.as_ref() else {
            return null_arg("opts");
        };
        if out.is_null() {
            return null_arg("out");
        }
        let exterior = Medium::vacuum();
        let prepared = (|| {
            let interior = Medium::new(Complex64::new(eps_re, eps_im), 1.0)?;
            Ok::<_, Error>((interior, source(src, &exterior)?, solver_config(opts)?))
        })();
        let (interior, source, cfg) = match prepared {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match iterate(mesh.0.clone(), &source, &exterior, &interior, &cfg) {
            Ok(run) => {
                *out = Box::into_raw(Box::new(IescRun {
                    history: run.history,
                    currents: Some(run.currents),
                    converged: run.converged,
                }));
                IescStatus::Ok
            }
            Err(Error::Divergence { history }) => {
                let msg = format!("solver diverged after {} iterations", history.len());
                *out = Box::into_raw(Box::new(IescRun {
                    history,
                    currents: None,
                    converged: false,
                }));
                set_error(&msg);
                IescStatus::Divergence
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `run` must come from [`iesc_run_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn iesc_run_free(run: *mut IescRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn iesc_run_iterations(run: *const IescRun) -> usize {
    run.as_ref().map_or(0, |r| r.history.len())
}

/// 1 if the run met its tolerance, 0 otherwise.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn iesc_run_converged(run: *const IescRun) -> c_int {
    run.as_ref().map_or(0, |r| r.converged as c_int)
}

fn record(h: &ConvergenceHistory, idx: usize) -> IescIterationRecord {
    let r: &IterationRecord = &h.records[idx];
    IescIterationRecord {
        iteration: r.iteration as u32,
        max_abs_dj: r.max_abs_dj,
        max_abs_dm: r.max_abs_dm,
        l2_dj: r.l2_dj_total(),
        l2_dm: r.l2_dm_total(),
        relative_metric: h.relative_metric(idx),
        wall_seconds: r.wall_seconds,
    }
}

/// Statistics of pass `index` (0-based).
///
/// # Safety
/// `run` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iesc_run_record(
    run: *const IescRun,
    index: usize,
    out: *mut IescIterationRecord,
) -> IescStatus {
    let Some(r) = run.as_ref() else {
        return null_arg("run");
    };
    if out.is_null() {
        return null_arg("out");
    }
    if index >= r.history.len() {
        return fail(Error::InvalidArgument(format!(
            "record {index} of {}",
            r.history.len()
        )));
    }
    *out = record(&r.history, index);
    IescStatus::Ok
}

unsafe fn write_field(dst: *mut f64, src: &[CVec3]) {
    let out = std::slice::from_raw_parts_mut(dst, 6 * src.len());
    for (chunk, v) in out.chunks_exact_mut(6).zip(src) {
        let [x, y, z] = v.components();
        chunk.copy_from_slice(&[x.re, x.im, y.re, y.im, z.re, z.im]);
    }
}

/// Final currents as `6 * len` doubles each, ordered
/// `(x.re, x.im, y.re, y.im, z.re, z.im)` per node.
///
/// # Safety
/// `run` must be a live handle; `j` and `m` valid for `6 * len` writes.
#[no_mangle]
pub unsafe extern "C" fn iesc_run_currents(
    run: *const IescRun,
    j: *mut f64,
    m: *mut f64,
    len: usize,
) -> IescStatus {
    let Some(r) = run.as_ref() else {
        return null_arg("run");
    };
    if j.is_null() || m.is_null() {
        return null_arg("current buffer");
    }
    let Some(c) = &r.currents else {
        return fail(Error::InvalidState("run has no currents".into()));
    };
    if len != c.j.len() {
        return fail(Error::InvalidArgument(format!(
            "buffer for {len} nodes, run has {}",
            c.j.len()
        )));
    }
    write_field(j, &c.j);
    write_field(m, &c.m);
    IescStatus::Ok
}

/// Mie amplitudes `S₁, S₂` of a sphere at `n` angles (radians), written as
/// `(re, im)` pairs.
///
/// # Safety
/// `theta` valid for `n` reads; `s1` and `s2` for `2n` writes.
#[no_mangle]
pub unsafe extern "C" fn iesc_mie_amplitudes(
    radius: f64,
    eps: f64,
    theta: *const f64,
    n: usize,
    s1: *mut f64,
    s2: *mut f64,
) -> IescStatus {
    guard(|| {
        if theta.is_null() || s1.is_null() || s2.is_null() {
            return null_arg("angle or amplitude buffer");
        }
        let sol = match sphere_solution(radius, Complex64::new(eps, 0.0)) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        let angles = std::slice::from_raw_parts(theta, n);
        let o1 = std::slice::from_raw_parts_mut(s1, 2 * n);
        let o2 = std::slice::from_raw_parts_mut(s2, 2 * n);
        for (i, (a, b)) in mie_far_field(&sol, angles).into_iter().enumerate() {
            o1[2 * i..2 * i + 2].copy_from_slice(&[a.re, a.im]);
            o2[2 * i..2 * i + 2].copy_from_slice(&[b.re, b.im]);
        }
        IescStatus::Ok
    })
}

/// Extinction and scattering efficiencies of a sphere.
///
/// # Safety
/// `q_ext` and `q_sca` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iesc_mie_efficiencies(
    radius: f64,
    eps: f64,
    q_ext: *mut f64,
    q_sca: *mut f64,
) -> IescStatus {
    guard(|| {
        if q_ext.is_null() || q_sca.is_null() {
            return null_arg("efficiency output");
        }
        match sphere_solution(radius, Complex64::new(eps, 0.0)) {
            Ok(s) => {
                *q_ext = s.q_ext();
                *q_sca = s.q_sca();
                IescStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Run the experiment described by a config file. `out_dir` may be null to
/// use the directory named in the file.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out_dir` null or one.
#[no_mangle]
pub unsafe extern "C" fn iesc_run_config(
    config_path: *const c_char,
    out_dir: *const c_char,
    deterministic: c_int,
) -> IescStatus {
    guard(|| {
        if config_path.is_null() {
            return null_arg("config_path");
        }
        let path = PathBuf::from(CStr::from_ptr(config_path).to_string_lossy().into_owned());
        let out = (!out_dir.is_null())
            .then(|| PathBuf::from(CStr::from_ptr(out_dir).to_string_lossy().into_owned()));
        let opts = RunOptions {
            out,
            deterministic: deterministic != 0,
        };
        match load_config(&path).and_then(|cfg| run_experiment(&cfg, &opts)) {
            Ok(_) => IescStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_codes_cover_errors() {
        assert_eq!(
            status_of(&Error::Capacity {
                required: 2,
                cap: 1
            }),
            IescStatus::Capacity
        );
        assert_eq!(
            status_of(&Error::Divergence {
                history: ConvergenceHistory::default()
            }),
            IescStatus::Divergence
        );
    }

    #[test]
    fn last_error_is_thread_local() {
        set_error("here");
        let msg = unsafe { CStr::from_ptr(iesc_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "here");
        std::thread::spawn(|| {
            let msg = unsafe { CStr::from_ptr(iesc_last_error_message()) };
            assert!(msg.to_bytes().is_empty());
        })
        .join()
        .unwrap();
    }
}

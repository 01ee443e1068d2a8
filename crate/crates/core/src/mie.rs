//! Lorenz–Mie series for a homogeneous sphere under plane-wave incidence.
//!
//! Coefficients follow the Bohren–Huffman form with Riccati–Bessel functions
//! `ψ_n(x) = x j_n(x)`, `χ_n(x) = −x y_n(x)` and `ξ_n = ψ_n − jχ_n`. The
//! logarithmic derivative `D_n(mx)` is built by downward recursion. In
//! [`mie_coefficients`] an absorbing index has positive imaginary part.

use crate::error::{Error, Result};
use crate::greens::Medium;
use crate::iesc::IterateOutput;
use crate::incident::PlaneWave;
use crate::radiate::{radiate, SelfTermPolicy, Summation, SurfaceCurrents};
use crate::vector::Vec3;
use num_complex::Complex64;
use rayon::prelude::*;

/// Largest admissible truncation order.
pub const MAX_ORDER: usize = 10_000;

/// Observation distance for far-field sampling of radiated currents, in λ.
pub const FAR_DISTANCE: f64 = 1.0e5;

#[derive(Debug, Clone, PartialEq)]
pub struct MieSolution {
    pub size_parameter: f64,
    pub refractive_index: Complex64,
    /// `a_n` for `n = 1..=n_max`, stored at index `n − 1`.
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

/// `ceil(x + 4 x^{1/3} + 2)`.
pub fn wiscombe_order(x: f64) -> usize {
    (x + 4.0 * x.cbrt() + 2.0).ceil() as usize
}

impl MieSolution {
    pub fn n_max(&self) -> usize {
        self.a.len()
    }

    /// Extinction efficiency from the coefficient sum.
    pub fn q_ext(&self) -> f64 {
        let s: f64 = self
            .a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(i, (a, b))| (2 * i + 3) as f64 * (a + b).re)
            .sum();
        2.0 * s / (self.size_parameter * self.size_parameter)
    }

    pub fn q_sca(&self) -> f64 {
        let s: f64 = self
            .a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(i, (a, b))| (2 * i + 3) as f64 * (a.norm_sqr() + b.norm_sqr()))
            .sum();
        2.0 * s / (self.size_parameter * self.size_parameter)
    }

    /// Extinction efficiency from the forward amplitude, `4 Re S(0) / x²`.
    pub fn q_ext_forward(&self) -> f64 {
        let s = self.amplitudes(0.0).0;
        4.0 * s.re / (self.size_parameter * self.size_parameter)
    }

    /// `(S₁(θ), S₂(θ))` at scattering angle `theta`.
    pub fn amplitudes(&self, theta: f64) -> (Complex64, Complex64) {
        let mu = theta.cos();
        let (mut pi_prev, mut pi) = (0.0, 1.0);
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut s2 = Complex64::new(0.0, 0.0);
        for (i, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let n = (i + 1) as f64;
            let tau = n * mu * pi - (n + 1.0) * pi_prev;
            let f = (2.0 * n + 1.0) / (n * (n + 1.0));
            s1 += f * (a * pi + b * tau);
            s2 += f * (a * tau + b * pi);
            let next = ((2.0 * n + 1.0) * mu * pi - (n + 1.0) * pi_prev) / n;
            pi_prev = pi;
            pi = next;
        }
        (s1, s2)
    }
}

/// Scattering coefficients with the default truncation order.
pub fn mie_coefficients(x: f64, m: Complex64) -> Result<MieSolution> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::invalid(format!(
            "size parameter must be positive, got {x}"
        )));
    }
    mie_coefficients_to(x, m, wiscombe_order(x))
}

/// Scattering coefficients truncated at `n_max` (at least the default order).
pub fn mie_coefficients_to(x: f64, m: Complex64, n_max: usize) -> Result<MieSolution> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::invalid(format!(
            "size parameter must be positive, got {x}"
        )));
    }
    if !(m.re > 0.0) || !m.is_finite() {
        return Err(Error::invalid(format!(
            "refractive index must have positive real part, got {m}"
        )));
    }
    let required = wiscombe_order(x);
    if required > MAX_ORDER || n_max > MAX_ORDER {
        return Err(Error::Capacity {
            required: required.max(n_max),
            cap: MAX_ORDER,
        });
    }
    let n_max = n_max.max(required);
    let mx = m * x;

    // D_n(mx), n = 0..=n_max, by downward recursion from well above n_max.
    // The error of the zero start decays slowly across the transition region
    // n ≈ |mx|, so the start sits at twice the larger of the two.
    let start = 2 * n_max.max(mx.norm().ceil() as usize) + 16;
    let mut d = vec![Complex64::new(0.0, 0.0); n_max + 1];
    let mut dn = Complex64::new(0.0, 0.0);
    for n in (1..=start).rev() {
        let nz = n as f64 / mx;
        dn = nz - 1.0 / (dn + nz);
        if n - 1 <= n_max {
            d[n - 1] = dn;
        }
    }
    // The same recursion at real argument gives ψ_n through ψ_{n−1}/ψ_n = D_n + n/x.
    let mut dx = vec![0.0; n_max + 1];
    let mut dr = 0.0;
    for n in (1..=start).rev() {
        let nx = n as f64 / x;
        dr = nx - 1.0 / (dr + nx);
        if n - 1 <= n_max {
            dx[n - 1] = dr;
        }
    }

    let mut a = Vec::with_capacity(n_max);
    let mut b = Vec::with_capacity(n_max);
    let (mut psi_prev, mut chi_prev, mut chi) = (x.sin(), -x.sin(), x.cos());
    for n in 1..=n_max {
        let nf = n as f64;
        let psi = psi_prev / (dx[n] + nf / x);
        let chi_n = (2.0 * nf - 1.0) / x * chi - chi_prev;
        chi_prev = chi;
        chi = chi_n;
        let xi = Complex64::new(psi, -chi_n);
        let xi_prev = Complex64::new(psi_prev, -chi_prev);
        let ta = d[n] / m + nf / x;
        let tb = d[n] * m + nf / x;
        a.push((ta * psi - psi_prev) / (ta * xi - xi_prev));
        b.push((tb * psi - psi_prev) / (tb * xi - xi_prev));
        psi_prev = psi;
    }
    let sol = MieSolution {
        size_parameter: x,
        refractive_index: m,
        a,
        b,
    };
    if sol.a.iter().chain(&sol.b).any(|c| !c.is_finite()) {
        return Err(Error::invalid("Mie coefficients are not finite"));
    }
    Ok(sol)
}

/// `(S₁, S₂)` at each scattering angle.
pub fn mie_far_field(sol: &MieSolution, angles: &[f64]) -> Vec<(Complex64, Complex64)> {
    angles.par_iter().map(|&t| sol.amplitudes(t)).collect()
}

/// Mie solution for a sphere of radius `radius` (λ) and interior permittivity
/// `eps_rel` in vacuum.
///
/// `eps_rel` follows the solver's `e^{+jωt}` convention (loss is
/// `Im ε < 0`); the index handed to the series is its conjugate root, so
/// loss appears as `Im m > 0` as the coefficient formulas expect.
pub fn sphere_solution(radius: f64, eps_rel: Complex64) -> Result<MieSolution> {
    mie_coefficients(crate::greens::K0 * radius, eps_rel.sqrt().conj())
}

/// Scattering plane of a bistatic cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterPlane {
    /// Contains the propagation and polarization directions; compared to `S₂`.
    E,
    /// Perpendicular to the polarization; compared to `S₁`.
    H,
}

/// One row of a far-field comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldSample {
    pub theta: f64,
    pub plane: ScatterPlane,
    /// `r² |E_s|² / |E₀|²` from the radiated currents.
    pub iesc: f64,
    /// `|S|² / k²` from the series.
    pub mie: f64,
    /// `10 log₁₀(iesc / mie)`.
    pub diff_db: f64,
}

/// Direction at scattering angle `theta` within `plane`.
pub fn scatter_direction(wave: &PlaneWave, plane: ScatterPlane, theta: f64) -> Vec3 {
    let k = wave.propagation;
    let p = match plane {
        ScatterPlane::E => wave.polarization,
        ScatterPlane::H => k.cross(wave.polarization),
    };
    k * theta.cos() + p * theta.sin()
}

/// Radiate exterior currents to the far zone and compare bistatic
/// intensities with the series in both principal planes.
pub fn compare_far_fields(
    currents: &SurfaceCurrents,
    exterior: &Medium,
    wave: &PlaneWave,
    sol: &MieSolution,
    angles: &[f64],
) -> Result<Vec<FarFieldSample>> {
    if currents.j.iter().chain(&currents.m).any(|v| !v.is_finite()) {
        return Err(Error::InvalidState("currents are not finite".into()));
    }
    let e0 = wave.amplitude.norm_sqr();
    if e0 == 0.0 {
        return Err(Error::invalid("plane-wave amplitude is zero"));
    }
    let k = exterior.wavenumber.re;
    let planes = [ScatterPlane::E, ScatterPlane::H];
    let mut obs = Vec::with_capacity(2 * angles.len());
    for &plane in &planes {
        obs.extend(
            angles
                .iter()
                .map(|&t| scatter_direction(wave, plane, t) * FAR_DISTANCE),
        );
    }
    let policy = SelfTermPolicy::exclude_self();
    let field = radiate(currents, exterior, &obs, &policy, Summation::Ordered)?;
    let series = mie_far_field(sol, angles);
    let mut out = Vec::with_capacity(obs.len());
    for (pi, &plane) in planes.iter().enumerate() {
        for (ai, &theta) in angles.iter().enumerate() {
            let e = field.e[pi * angles.len() + ai];
            let iesc = FAR_DISTANCE * FAR_DISTANCE * e.norm_sqr() / e0;
            let (s1, s2) = series[ai];
            let s = if plane == ScatterPlane::E { s2 } else { s1 };
            let mie = s.norm_sqr() / (k * k);
            out.push(FarFieldSample {
                theta,
                plane,
                iesc,
                mie,
                diff_db: 10.0 * (iesc / mie).log10(),
            });
        }
    }
    Ok(out)
}

/// [`compare_far_fields`] for the output of a solver run. Runs whose final
/// metric shows no reduction from the first pass are refused.
pub fn compare_run(
    run: &IterateOutput,
    exterior: &Medium,
    wave: &PlaneWave,
    sol: &MieSolution,
    angles: &[f64],
) -> Result<Vec<FarFieldSample>> {
    let h = &run.history;
    if h.is_empty() || (!run.converged && h.relative_metric(h.len() - 1) >= 1.0) {
        return Err(Error::InvalidState(
            "far-field comparison needs a run whose deviation decreased".into(),
        ));
    }
    compare_far_fields(&run.currents, exterior, wave, sol, angles)
}

/// Angle of the first local minimum of the intensity in `plane` after
/// forward scattering, searched on a grid of `samples` points over `[0, π]`.
pub fn first_null(sol: &MieSolution, plane: ScatterPlane, samples: usize) -> f64 {
    lobe_edge(sol, plane, 0.0, samples)
}

/// First angle at which the intensity in `plane` stops decreasing or falls
/// below `floor` times its forward value.
pub fn lobe_edge(sol: &MieSolution, plane: ScatterPlane, floor: f64, samples: usize) -> f64 {
    let step = std::f64::consts::PI / samples.max(2) as f64;
    let power = |t: f64| {
        let (s1, s2) = sol.amplitudes(t);
        match plane {
            ScatterPlane::E => s2.norm_sqr(),
            ScatterPlane::H => s1.norm_sqr(),
        }
    };
    let limit = floor * power(0.0);
    let mut prev = power(0.0);
    for i in 1..=samples {
        let t = i as f64 * step;
        let cur = power(t);
        if cur > prev {
            return (i - 1) as f64 * step;
        }
        if cur < limit {
            return t;
        }
        prev = cur;
    }
    std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn m2() -> Complex64 {
        Complex64::new(2.0f64.sqrt(), 0.0)
    }

    #[test]
    fn rayleigh_limit() {
        let x = 0.01;
        let sol = mie_coefficients(x, m2()).unwrap();
        let m_sq = 2.0;
        let expect = Complex64::new(0.0, -2.0 * x.powi(3) / 3.0 * (m_sq - 1.0) / (m_sq + 2.0));
        assert!(
            (sol.a[0] - expect).norm() < 0.01 * expect.norm(),
            "{}",
            sol.a[0]
        );
        assert!((sol.a[0].im + 1.667e-7).abs() < 0.01 * 1.667e-7);
        assert!(sol.b[0].norm() < 1e-3 * sol.a[0].norm());
    }

    #[test]
    fn truncation_is_stable() {
        let x = 2.0 * PI * 3.0;
        let base = mie_coefficients(x, m2()).unwrap();
        let more = mie_coefficients_to(x, m2(), base.n_max() + 8).unwrap();
        assert!((base.q_sca() - more.q_sca()).abs() < 1e-10 * base.q_sca());
        for (p, q) in base.a.iter().zip(&more.a) {
            assert!((p - q).norm() <= 1e-12 * p.norm().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn optical_theorem_and_energy() {
        for x in [0.5, 5.0, 2.0 * PI * 3.0, 2.0 * PI * 5.0] {
            let sol = mie_coefficients(x, m2()).unwrap();
            let (qe, qs, qf) = (sol.q_ext(), sol.q_sca(), sol.q_ext_forward());
            assert!((qe - qf).abs() < 1e-8 * qe, "x {x}: {qe} vs {qf}");
            assert!((qe - qs).abs() < 1e-8 * qe, "x {x}: {qe} vs {qs}");
        }
        let lossy = mie_coefficients(4.0, Complex64::new(1.5, 0.1)).unwrap();
        assert!(lossy.q_sca() >= 0.0 && lossy.q_sca() <= lossy.q_ext());
    }

    #[test]
    fn forward_and_backward_symmetry() {
        let sol = mie_coefficients(7.3, m2()).unwrap();
        let (s1, s2) = sol.amplitudes(0.0);
        assert_eq!(s1, s2);
        let (b1, b2) = sol.amplitudes(PI);
        assert!((b1 + b2).norm() < 1e-10 * b1.norm());
    }

    #[test]
    fn capacity_and_argument_errors() {
        assert!(matches!(
            mie_coefficients(1.0e4, m2()),
            Err(Error::Capacity { .. })
        ));
        assert!(mie_coefficients(0.0, m2()).is_err());
        assert!(mie_coefficients(1.0, Complex64::new(-1.0, 0.0)).is_err());
    }

    #[test]
    fn first_null_of_large_sphere_is_narrow() {
        let sol = sphere_solution(5.0, Complex64::new(2.0, 0.0)).unwrap();
        for plane in [ScatterPlane::E, ScatterPlane::H] {
            let t = first_null(&sol, plane, 3600);
            assert!(t > 0.02 && t < 0.3, "{t}");
        }
    }
}

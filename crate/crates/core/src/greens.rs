//! Homogeneous-medium Green's functions.
//!
//! Lengths are in free-space wavelengths, so `k₀ = 2π`. Time dependence is
//! `e^{+jωt}` and the scalar kernel is `g(R) = e^{−jkR} / (4πR)`.
//!
//! The four dyads act on electric (J) and magnetic (M) currents:
//!
//! ```text
//! G_E^J = −jωμ (I + ∇∇/k²) g      G_E^M = −∇g ×
//! G_H^J =  ∇g ×                   G_H^M = −jωε (I + ∇∇/k²) g
//! ```
//!
//! with `ωμ = kη` and `ωε = k/η`. All derivatives are closed form.

use crate::error::{Error, Result};
use crate::vector::{CMat3, CVec3, Vec3};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Free-space wave impedance `μ₀c` in ohms.
pub const ETA0: f64 = 376.730_313_668;

/// Free-space wavenumber in radians per wavelength.
pub const K0: f64 = 2.0 * PI;

const J: Complex64 = Complex64::new(0.0, 1.0);
const INV_4PI: f64 = 1.0 / (4.0 * PI);

/// Homogeneous, isotropic medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub eps_rel: Complex64,
    pub mu_rel: f64,
    pub wavenumber: Complex64,
    pub impedance: Complex64,
}

impl Medium {
    pub fn new(eps_rel: Complex64, mu_rel: f64) -> Result<Self> {
        if !(eps_rel.re > 0.0) || !eps_rel.is_finite() {
            return Err(Error::invalid(format!(
                "relative permittivity must have positive real part, got {eps_rel}"
            )));
        }
        if !(mu_rel > 0.0 && mu_rel.is_finite()) {
            return Err(Error::invalid(format!(
                "relative permeability must be positive, got {mu_rel}"
            )));
        }
        let mu = Complex64::new(mu_rel, 0.0);
        Ok(Self {
            eps_rel,
            mu_rel,
            wavenumber: K0 * (mu * eps_rel).sqrt(),
            impedance: ETA0 * (mu / eps_rel).sqrt(),
        })
    }

    pub fn vacuum() -> Self {
        Self::new(Complex64::new(1.0, 0.0), 1.0).expect("vacuum is valid")
    }

    /// Lossless dielectric with `μ_r = 1`.
    pub fn dielectric(eps_rel: f64) -> Result<Self> {
        Self::new(Complex64::new(eps_rel, 0.0), 1.0)
    }

    /// `ωμ = kη`
    pub fn omega_mu(&self) -> Complex64 {
        self.wavenumber * self.impedance
    }

    /// `ωε = k/η`
    pub fn omega_eps(&self) -> Complex64 {
        self.wavenumber / self.impedance
    }
}

/// `e^{−jkR} / (4πR)`.
pub fn scalar_green(k: Complex64, r: f64) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(Error::Singularity(r));
    }
    Ok((-J * k * r).exp() * (INV_4PI / r))
}

/// Gradient of `g` with respect to the observation point.
pub fn grad_green(k: Complex64, obs: Vec3, src: Vec3) -> Result<CVec3> {
    let d = obs - src;
    let r = d.norm();
    let g = scalar_green(k, r)?;
    let dg = -(J * k + 1.0 / r) * g;
    Ok((d * (1.0 / r)).to_complex().scale(dg))
}

/// The four dyadic kernels at one observation/source pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadSample {
    pub e_j: CMat3,
    pub e_m: CMat3,
    pub h_j: CMat3,
    pub h_m: CMat3,
}

/// Evaluate all four dyads for `medium` between `obs` and `src`.
pub fn dyads(medium: &Medium, obs: Vec3, src: Vec3) -> Result<DyadSample> {
    let d = obs - src;
    let r = d.norm();
    if !(r > 0.0) {
        return Err(Error::Singularity(r));
    }
    let k = medium.wavenumber;
    let g = scalar_green(k, r)?;
    let rh = d * (1.0 / r);
    let q = 1.0 / (k * r);
    let a = 1.0 - J * q - q * q;
    let b = -1.0 + 3.0 * J * q + 3.0 * q * q;
    let dg = -(J * k + 1.0 / r) * g;

    let u = rh.to_array();
    let mut core = CMat3::zero();
    let mut curl = CMat3::zero();
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            core.0[i][j] = g * (a * delta + b * u[i] * u[j]);
        }
    }
    // [R̂]× so that curl·v = R̂ × v, scaled by g'.
    curl.0[0][1] = Complex64::new(-u[2], 0.0);
    curl.0[0][2] = Complex64::new(u[1], 0.0);
    curl.0[1][0] = Complex64::new(u[2], 0.0);
    curl.0[1][2] = Complex64::new(-u[0], 0.0);
    curl.0[2][0] = Complex64::new(-u[1], 0.0);
    curl.0[2][1] = Complex64::new(u[0], 0.0);
    let curl = curl.scale(dg);

    Ok(DyadSample {
        e_j: core.scale(-J * medium.omega_mu()),
        e_m: curl.scale(Complex64::new(-1.0, 0.0)),
        h_j: curl,
        h_m: core.scale(-J * medium.omega_eps()),
    })
}

/// Per-medium constants for the fused radiation kernel.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KernelConsts {
    k: Complex64,
    inv_k: Complex64,
    minus_j_omega_mu: Complex64,
    inv_eta2: Complex64,
    lossless: bool,
}

impl KernelConsts {
    pub(crate) fn new(medium: &Medium) -> Self {
        let k = medium.wavenumber;
        Self {
            k,
            inv_k: 1.0 / k,
            minus_j_omega_mu: -J * medium.omega_mu(),
            inv_eta2: 1.0 / (medium.impedance * medium.impedance),
            lossless: k.im == 0.0,
        }
    }

    /// Add the fields of one weighted source (`wj = w′J`, `wm = w′M`) at `src`
    /// to the running sums at `obs`. Returns without contribution when the
    /// points coincide; callers decide whether that is an error.
    #[inline(always)]
    pub(crate) fn accumulate(
        &self,
        obs: Vec3,
        src: Vec3,
        wj: CVec3,
        wm: CVec3,
        e: &mut CVec3,
        h: &mut CVec3,
    ) {
        let d = obs - src;
        let r2 = d.norm_sqr();
        if r2 == 0.0 {
            return;
        }
        let inv_r = 1.0 / r2.sqrt();
        let r = r2 * inv_r;
        let rh = d * inv_r;

        let phase = if self.lossless {
            let (s, c) = (self.k.re * r).sin_cos();
            Complex64::new(c, -s)
        } else {
            (-J * self.k * r).exp()
        };
        let g = phase * (INV_4PI * inv_r);
        let q = self.inv_k * inv_r;
        let q2 = q * q;
        let jq = J * q;
        let a = 1.0 - jq - q2;
        let b = 3.0 * (jq + q2) - 1.0;
        let dg = -(J * self.k + inv_r) * g;

        let ce = self.minus_j_omega_mu * g;
        let alpha = ce * a;
        let beta = ce * b;

        let rj = wj.dot_real(rh);
        let rm = wm.dot_real(rh);
        let rxj = CVec3::real_cross(rh, wj);
        let rxm = CVec3::real_cross(rh, wm);

        let bj = beta * rj;
        *e += CVec3::new(
            alpha * wj.x + bj * rh.x - dg * rxm.x,
            alpha * wj.y + bj * rh.y - dg * rxm.y,
            alpha * wj.z + bj * rh.z - dg * rxm.z,
        );
        let ah = alpha * self.inv_eta2;
        let bm = beta * self.inv_eta2 * rm;
        *h += CVec3::new(
            ah * wm.x + bm * rh.x + dg * rxj.x,
            ah * wm.y + bm * rh.y + dg * rxj.y,
            ah * wm.z + bm * rh.z + dg * rxj.z,
        );
    }
}

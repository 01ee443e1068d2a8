//! Spherical-harmonic band limiting of fields sampled on a sphere mesh.
//!
//! Each Cartesian component is expanded in `e^{jmφ}` by a direct DFT over the
//! grid columns; every azimuthal order `|m| ≤ L` is then projected onto the
//! span of the associated Legendre functions `P_l^m(cos θ)`, `|m| ≤ l ≤ L`,
//! under the discrete `sin θ` inner product of the grid rows, and each degree
//! is scaled by a taper weight `σ_l`. With all weights equal to one the
//! filter is an orthogonal projection in that inner product.

use crate::error::{Error, Result};
use crate::geometry::SurfaceMesh;
use crate::iesc::tangential_project;
use crate::vector::{CVec3, Vec3};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct SphereFilter {
    n_theta: usize,
    n_phi: usize,
    lmax: usize,
    /// `σ_l` for `l = 0..=lmax`.
    taper: Vec<f64>,
    /// `sqrt(sin θ_i)` per row.
    sqrt_w: Vec<f64>,
    /// Per order `m ≥ 0`: orthonormal columns spanning the weighted Legendre
    /// functions of that order, stored row-major as `n_theta × cols`.
    basis: Vec<(usize, Vec<f64>)>,
    /// `e^{jmφ_j}` for `m = 0..=L`, row-major `(L + 1) × n_phi`.
    twiddle: Vec<Complex64>,
}

impl SphereFilter {
    /// Sharp truncation retaining degrees `l ≤ lmax`.
    pub fn new(mesh: &SurfaceMesh, lmax: usize) -> Result<Self> {
        Self::with_taper(mesh, vec![1.0; lmax + 1])
    }

    /// Unit weight up to `l_pass`, raised-cosine roll-off to zero at `l_stop`.
    pub fn raised_cosine(mesh: &SurfaceMesh, l_pass: usize, l_stop: usize) -> Result<Self> {
        if l_stop <= l_pass {
            return Self::new(mesh, l_pass);
        }
        let taper = (0..l_stop)
            .map(|l| {
                if l <= l_pass {
                    1.0
                } else {
                    let t = (l - l_pass) as f64 / (l_stop - l_pass) as f64;
                    0.5 * (1.0 + (std::f64::consts::PI * t).cos())
                }
            })
            .collect();
        Self::with_taper(mesh, taper)
    }

    /// Filter with per-degree weights `taper[l]`, `l = 0..taper.len()`.
    pub fn with_taper(mesh: &SurfaceMesh, taper: Vec<f64>) -> Result<Self> {
        if taper.is_empty() || taper.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("taper needs at least one finite weight"));
        }
        let lmax = taper.len() - 1;
        if mesh.radius.is_none() {
            return Err(Error::invalid("band limiting requires a sphere mesh"));
        }
        let (n_theta, n_phi) = mesh.grid_shape;
        if lmax + 1 > n_theta || 2 * lmax + 1 > n_phi {
            return Err(Error::invalid(format!(
                "degree {lmax} is not resolved by a {n_theta}×{n_phi} grid"
            )));
        }
        let theta = mesh.theta();
        let sqrt_w: Vec<f64> = theta.iter().map(|t| t.sin().sqrt()).collect();
        let basis = (0..=lmax)
            .map(|m| legendre_basis(theta, &sqrt_w, m, lmax))
            .collect();
        let phi = mesh.phi();
        let mut twiddle = Vec::with_capacity((lmax + 1) * n_phi);
        for m in 0..=lmax {
            twiddle.extend(
                phi.iter()
                    .map(|&p| Complex64::from_polar(1.0, m as f64 * p)),
            );
        }
        Ok(Self {
            n_theta,
            n_phi,
            lmax,
            taper,
            sqrt_w,
            basis,
            twiddle,
        })
    }

    /// Degree `ceil(factor · k R)` for wavenumber `k` on `mesh`.
    pub fn degree_for(mesh: &SurfaceMesh, wavenumber: f64, factor: f64) -> Result<usize> {
        let r = mesh
            .radius
            .ok_or_else(|| Error::invalid("band limiting requires a sphere mesh"))?;
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid(format!(
                "band-limit factor must be positive, got {factor}"
            )));
        }
        Ok((factor * wavenumber * r).ceil() as usize)
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Band-limit one complex scalar field given in node order.
    pub fn apply_scalar(&self, f: &[Complex64]) -> Vec<Complex64> {
        let (nt, np, l) = (self.n_theta, self.n_phi, self.lmax);
        assert_eq!(f.len(), nt * np, "field does not match the filter grid");
        let norders = 2 * l + 1;
        // Order index: m ≥ 0 at `m`, m < 0 at `L + |m|`.
        let mut coef = vec![Complex64::new(0.0, 0.0); norders * nt];
        for i in 0..nt {
            let row = &f[i * np..(i + 1) * np];
            for m in 0..=l {
                let tw = &self.twiddle[m * np..(m + 1) * np];
                let (mut pos, mut neg) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for (v, t) in row.iter().zip(tw) {
                    pos += v * t.conj();
                    neg += v * t;
                }
                coef[m * nt + i] = pos;
                if m > 0 {
                    coef[(l + m) * nt + i] = neg;
                }
            }
        }
        for o in 0..norders {
            let m = if o <= l { o } else { o - l };
            self.project(m, &mut coef[o * nt..(o + 1) * nt]);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); nt * np];
        let scale = 1.0 / np as f64;
        for i in 0..nt {
            let row = &mut out[i * np..(i + 1) * np];
            for m in 0..=l {
                let tw = &self.twiddle[m * np..(m + 1) * np];
                let pos = coef[m * nt + i] * scale;
                let neg = if m > 0 {
                    coef[(l + m) * nt + i] * scale
                } else {
                    Complex64::new(0.0, 0.0)
                };
                for (v, t) in row.iter_mut().zip(tw) {
                    *v += pos * t + neg * t.conj();
                }
            }
        }
        out
    }

    /// Band-limit each Cartesian component of a vector field.
    pub fn apply(&self, f: &[CVec3]) -> Vec<CVec3> {
        let comp = |c: usize| -> Vec<Complex64> {
            let s: Vec<Complex64> = f.iter().map(|v| v.components()[c]).collect();
            self.apply_scalar(&s)
        };
        let (x, y, z) = (comp(0), comp(1), comp(2));
        (0..f.len()).map(|k| CVec3::new(x[k], y[k], z[k])).collect()
    }

    /// Band-limit a tangential field and restore tangency.
    pub fn apply_tangential(&self, f: &[CVec3], normals: &[Vec3]) -> Vec<CVec3> {
        self.apply(f)
            .into_iter()
            .zip(normals)
            .map(|(v, &n)| tangential_project(v, n))
            .collect()
    }

    // Replace one θ profile by its tapered projection onto order `m`.
    fn project(&self, m: usize, g: &mut [Complex64]) {
        let (cols, q) = &self.basis[m];
        let nt = self.n_theta;
        let mut c = vec![Complex64::new(0.0, 0.0); *cols];
        for i in 0..nt {
            let gi = g[i] * self.sqrt_w[i];
            for (cj, &qij) in c.iter_mut().zip(&q[i * cols..(i + 1) * cols]) {
                *cj += gi * qij;
            }
        }
        // Column j spans degree m + j within the nested Legendre spaces.
        for (j, cj) in c.iter_mut().enumerate() {
            *cj *= self.taper[m + j];
        }
        for i in 0..nt {
            let mut acc = Complex64::new(0.0, 0.0);
            for (cj, &qij) in c.iter().zip(&q[i * cols..(i + 1) * cols]) {
                acc += cj * qij;
            }
            g[i] = acc / self.sqrt_w[i];
        }
    }
}

/// Orthonormal basis (in the plain Euclidean sense) of the columns
/// `sqrt(w_i) P̄_l^m(cos θ_i)`, `l = m..=lmax`.
fn legendre_basis(theta: &[f64], sqrt_w: &[f64], m: usize, lmax: usize) -> (usize, Vec<f64>) {
    let nt = theta.len();
    let ncols = lmax + 1 - m;
    let mut cols: Vec<Vec<f64>> = vec![vec![0.0; nt]; ncols];
    for (i, &t) in theta.iter().enumerate() {
        let (x, s) = (t.cos(), t.sin());
        // Normalized P̄_m^m, then upward in l.
        let mut pmm = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
        for k in 1..=m {
            pmm *= s * ((2 * k + 1) as f64 / (2 * k) as f64).sqrt();
        }
        let mut prev = 0.0;
        let mut cur = pmm;
        for l in m..=lmax {
            if l > m {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                let next = a * (x * cur - b * prev);
                prev = cur;
                cur = next;
            }
            cols[l - m][i] = cur * sqrt_w[i];
        }
    }
    // Two passes of modified Gram–Schmidt.
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(ncols);
    for mut v in cols {
        let n0 = norm(&v);
        for _ in 0..2 {
            for u in &kept {
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
        }
        let n = norm(&v);
        if n > 1e-10 * n0 && n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
            kept.push(v);
        }
    }
    let cols = kept.len();
    let mut q = vec![0.0; nt * cols];
    for (j, v) in kept.iter().enumerate() {
        for i in 0..nt {
            q[i * cols + j] = v[i];
        }
    }
    (cols, q)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_sphere_mesh;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn low_degree_fields_pass_unchanged() {
        let mesh = make_sphere_mesh(1.0, 8.0).unwrap();
        let filt = SphereFilter::new(&mesh, 4).unwrap();
        // Degree ≤ 3 polynomial in Cartesian coordinates.
        let f: Vec<Complex64> = mesh
            .nodes
            .iter()
            .map(|p| c(p.x * p.y * p.z + 0.5, p.x * p.x - p.z))
            .collect();
        let g = filt.apply_scalar(&f);
        let worst = f
            .iter()
            .zip(&g)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "worst {worst}");
    }

    #[test]
    fn filter_is_idempotent_and_removes_high_degrees() {
        let mesh = make_sphere_mesh(1.0, 8.0).unwrap();
        let filt = SphereFilter::new(&mesh, 3).unwrap();
        let f: Vec<Complex64> = mesh
            .nodes
            .iter()
            .map(|p| c((7.0 * p.x).sin() + p.z, (5.0 * p.y * p.z).cos()))
            .collect();
        let g = filt.apply_scalar(&f);
        let h = filt.apply_scalar(&g);
        let worst = g
            .iter()
            .zip(&h)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "worst {worst}");
        // A pure high-order azimuthal pattern is removed entirely.
        let hi: Vec<Complex64> = mesh
            .nodes
            .iter()
            .map(|p| {
                Complex64::from_polar(1.0, 6.0 * p.y.atan2(p.x)) * (p.x * p.x + p.y * p.y).powi(3)
            })
            .collect();
        let out = filt.apply_scalar(&hi);
        assert!(out.iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn rejects_unresolved_degree() {
        let mesh = make_sphere_mesh(0.5, 6.0).unwrap();
        let (nt, _) = mesh.grid_shape;
        assert!(SphereFilter::new(&mesh, nt).is_err());
        assert_eq!(
            SphereFilter::degree_for(&mesh, 2.0 * std::f64::consts::PI, 1.0).unwrap(),
            4
        );
    }
}

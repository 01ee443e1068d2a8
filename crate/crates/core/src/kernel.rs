//! Blocked evaluation of the fused radiation kernel for lossless media.
//!
//! Sources are stored as structure-of-arrays padded to a multiple of
//! `LANES`; each lane keeps its own accumulators and lanes are combined in a
//! fixed order, so results are reproducible bit for bit.

#![allow(clippy::excessive_precision)]

use crate::greens::Medium;
use crate::vector::{CVec3, Vec3};
use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, PI};
use wide::f64x8;

pub(crate) const LANES: usize = 8;

const INV_4PI: f64 = 1.0 / (4.0 * PI);
const FAR_AWAY: f64 = 1.0e9;

// fdlibm constants, kept at their published digits.
// π/2 split for Cody–Waite reduction.
const PIO2_1: f64 = 1.570_796_326_734_125_614_17;
const PIO2_2: f64 = 6.077_100_506_303_965_976_6e-11;
const PIO2_3: f64 = 2.022_266_248_711_166_455_8e-21;

const S1: f64 = -1.666_666_666_666_663_243_48e-01;
const S2: f64 = 8.333_333_333_322_489_461_24e-03;
const S3: f64 = -1.984_126_982_985_794_931_34e-04;
const S4: f64 = 2.755_731_370_707_006_767_89e-06;
const S5: f64 = -2.505_076_025_340_686_341_95e-08;
const S6: f64 = 1.589_690_995_211_550_102_21e-10;
const C1: f64 = 4.166_666_666_666_660_190_37e-02;
const C2: f64 = -1.388_888_888_887_410_957_49e-03;
const C3: f64 = 2.480_158_728_947_672_941_78e-05;
const C4: f64 = -2.755_731_435_139_066_330_35e-07;
const C5: f64 = 2.087_572_321_298_174_827_90e-09;
const C6: f64 = -1.135_964_755_778_819_482_65e-11;

type V = f64x8;

#[inline(always)]
fn load(s: &[f64]) -> V {
    V::new([s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7]])
}

/// Branch-free `(sin x, cos x)` for `0 ≤ x < 2⁵⁰`.
#[cfg(test)]
pub(crate) fn sincos(x: f64) -> (f64, f64) {
    let (s, c) = sincos_v(V::splat(x));
    (s.to_array()[0], c.to_array()[0])
}

#[inline(always)]
fn sincos_v(x: V) -> (V, V) {
    let n = (x * FRAC_2_PI).round();
    let y = ((x - n * PIO2_1) - n * PIO2_2) - n * PIO2_3;
    let z = y * y;
    let s = y + y * z * (((((z * S6 + S5) * z + S4) * z + S3) * z + S2) * z + S1);
    let c = (V::ONE - z * 0.5) + z * z * (((((z * C6 + C5) * z + C4) * z + C3) * z + C2) * z + C1);
    // Quadrant n mod 4 selects and signs the two polynomials.
    let q = n - (n * 0.25).floor() * 4.0;
    let odd = q.simd_eq(V::ONE) | q.simd_eq(V::splat(3.0));
    let sin = odd.select(c, s);
    let cos = odd.select(s, c);
    let sin = q.simd_ge(V::splat(2.0)).select(-sin, sin);
    let cos = (q.simd_eq(V::ONE) | q.simd_eq(V::splat(2.0))).select(-cos, cos);
    (sin, cos)
}

/// Weighted source nodes in structure-of-arrays form.
pub(crate) struct SourceBlock {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    // J and M, real and imaginary parts per Cartesian component.
    c: [Vec<f64>; 12],
}

impl SourceBlock {
    pub(crate) fn new(pos: &[Vec3], wj: &[CVec3], wm: &[CVec3]) -> Self {
        let len = pos.len();
        let padded = len.div_ceil(LANES) * LANES;
        let mut x = vec![FAR_AWAY; padded];
        let mut y = vec![FAR_AWAY; padded];
        let mut z = vec![FAR_AWAY; padded];
        let mut c: [Vec<f64>; 12] = std::array::from_fn(|_| vec![0.0; padded]);
        for i in 0..len {
            x[i] = pos[i].x;
            y[i] = pos[i].y;
            z[i] = pos[i].z;
            for (k, v) in wj[i]
                .components()
                .iter()
                .chain(wm[i].components().iter())
                .enumerate()
            {
                c[2 * k][i] = v.re;
                c[2 * k + 1][i] = v.im;
            }
        }
        Self { x, y, z, c }
    }

    pub(crate) fn padded_len(&self) -> usize {
        self.x.len()
    }
}

#[derive(Clone, Copy)]
pub(crate) struct LosslessKernel {
    k: f64,
    inv_k: f64,
    omega_mu: f64,
    inv_eta2: f64,
}

impl LosslessKernel {
    pub(crate) fn new(medium: &Medium) -> Option<Self> {
        let k = medium.wavenumber;
        let eta = medium.impedance;
        if k.im != 0.0 || eta.im != 0.0 {
            return None;
        }
        Some(Self {
            k: k.re,
            inv_k: 1.0 / k.re,
            omega_mu: k.re * eta.re,
            inv_eta2: 1.0 / (eta.re * eta.re),
        })
    }

    /// Sum over sources `[start, end)` (multiples of `LANES`), skipping any
    /// source with squared distance below `exclude_r2`.
    pub(crate) fn sum(
        &self,
        src: &SourceBlock,
        obs: Vec3,
        start: usize,
        end: usize,
        exclude_r2: f64,
    ) -> (CVec3, CVec3) {
        let mut acc = [V::ZERO; 12];
        let xs = &src.x[start..end];
        let ys = &src.y[start..end];
        let zs = &src.z[start..end];
        let cs: [&[f64]; 12] = std::array::from_fn(|k| &src.c[k][start..end]);
        let (k, inv_k, inv_eta2) = (self.k, self.inv_k, self.inv_eta2);
        for o in (0..xs.len()).step_by(LANES) {
            let dx = -load(&xs[o..]) + obs.x;
            let dy = -load(&ys[o..]) + obs.y;
            let dz = -load(&zs[o..]) + obs.z;
            let r2 = dx * dx + dy * dy + dz * dz;
            let keep = r2.simd_ge(V::splat(exclude_r2)) & r2.simd_gt(V::ZERO);
            let r2 = keep.select(r2, V::ONE);
            let inv_r = V::ONE / r2.sqrt();
            let r = r2 * inv_r;
            let (ux, uy, uz) = (dx * inv_r, dy * inv_r, dz * inv_r);

            let (s, c) = sincos_v(r * k);
            let amp = keep.select(inv_r * INV_4PI, V::ZERO);
            let gr = c * amp;
            let gi = -(s * amp);

            let q = inv_r * inv_k;
            let q2 = q * q;
            let (ar, ai) = (V::ONE - q2, -q);
            let (br, bi) = (q2 * 3.0 - 1.0, q * 3.0);
            // g' = −(jk + 1/R) g
            let dgr = -(inv_r * gr - gi * k);
            let dgi = -(gr * k + inv_r * gi);
            // −jωμ g
            let cer = gi * self.omega_mu;
            let cei = -(gr * self.omega_mu);
            let alr = cer * ar - cei * ai;
            let ali = cer * ai + cei * ar;
            let ber = cer * br - cei * bi;
            let bei = cer * bi + cei * br;

            let ld = |k: usize| load(&cs[k][o..]);
            let (jxr, jxi, jyr, jyi, jzr, jzi) = (ld(0), ld(1), ld(2), ld(3), ld(4), ld(5));
            let (mxr, mxi, myr, myi, mzr, mzi) = (ld(6), ld(7), ld(8), ld(9), ld(10), ld(11));

            let rjr = ux * jxr + uy * jyr + uz * jzr;
            let rji = ux * jxi + uy * jyi + uz * jzi;
            let rmr = ux * mxr + uy * myr + uz * mzr;
            let rmi = ux * mxi + uy * myi + uz * mzi;
            // β (R̂·J) and β (R̂·M)/η²
            let bjr = ber * rjr - bei * rji;
            let bji = ber * rji + bei * rjr;
            let bmr = (ber * rmr - bei * rmi) * inv_eta2;
            let bmi = (ber * rmi + bei * rmr) * inv_eta2;
            let ahr = alr * inv_eta2;
            let ahi = ali * inv_eta2;

            // R̂ × M and R̂ × J
            let xmxr = uy * mzr - uz * myr;
            let xmxi = uy * mzi - uz * myi;
            let xmyr = uz * mxr - ux * mzr;
            let xmyi = uz * mxi - ux * mzi;
            let xmzr = ux * myr - uy * mxr;
            let xmzi = ux * myi - uy * mxi;
            let xjxr = uy * jzr - uz * jyr;
            let xjxi = uy * jzi - uz * jyi;
            let xjyr = uz * jxr - ux * jzr;
            let xjyi = uz * jxi - ux * jzi;
            let xjzr = ux * jyr - uy * jxr;
            let xjzi = ux * jyi - uy * jxi;

            // E = αJ + β(R̂·J)R̂ − g'(R̂×M)
            acc[0] += alr * jxr - ali * jxi + bjr * ux - (dgr * xmxr - dgi * xmxi);
            acc[1] += alr * jxi + ali * jxr + bji * ux - (dgr * xmxi + dgi * xmxr);
            acc[2] += alr * jyr - ali * jyi + bjr * uy - (dgr * xmyr - dgi * xmyi);
            acc[3] += alr * jyi + ali * jyr + bji * uy - (dgr * xmyi + dgi * xmyr);
            acc[4] += alr * jzr - ali * jzi + bjr * uz - (dgr * xmzr - dgi * xmzi);
            acc[5] += alr * jzi + ali * jzr + bji * uz - (dgr * xmzi + dgi * xmzr);
            // H = (αM + β(R̂·M)R̂)/η² + g'(R̂×J)
            acc[6] += ahr * mxr - ahi * mxi + bmr * ux + (dgr * xjxr - dgi * xjxi);
            acc[7] += ahr * mxi + ahi * mxr + bmi * ux + (dgr * xjxi + dgi * xjxr);
            acc[8] += ahr * myr - ahi * myi + bmr * uy + (dgr * xjyr - dgi * xjyi);
            acc[9] += ahr * myi + ahi * myr + bmi * uy + (dgr * xjyi + dgi * xjyr);
            acc[10] += ahr * mzr - ahi * mzi + bmr * uz + (dgr * xjzr - dgi * xjzi);
            acc[11] += ahr * mzi + ahi * mzr + bmi * uz + (dgr * xjzi + dgi * xjzr);
        }
        let total = |k: usize| acc[k].to_array().iter().fold(0.0, |a, b| a + b);
        let cplx = |k: usize| Complex64::new(total(k), total(k + 1));
        (
            CVec3::new(cplx(0), cplx(2), cplx(4)),
            CVec3::new(cplx(6), cplx(8), cplx(10)),
        )
    }
}

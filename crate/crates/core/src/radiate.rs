//! Radiation of sampled surface currents by direct quadrature.
//!
//! `E(r) = Σ w′ [G_E^J(r, r′) J(r′) + G_E^M(r, r′) M(r′)]` and likewise for H.
//! Observation points close to the surface see the nearest source cells through
//! a finer tensor-product sub-quadrature with the cell current held constant;
//! every other cell contributes through its node alone.

use crate::error::{Error, Result};
use crate::geometry::SurfaceMesh;
use crate::greens::{KernelConsts, Medium};
use crate::kernel::{LosslessKernel, SourceBlock};
use crate::vector::{CVec3, Vec3};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Arc;

/// Default displacement of the ± evaluation surfaces, in wavelengths.
pub const DEFAULT_OFFSET: f64 = 1.0 / 40.0;

/// Cells closer than this many cell sizes are sub-sampled.
const NEAR_ZONE_CELLS: f64 = 3.0;

/// Sub-sample spacing as a fraction of the evaluation offset.
const SUB_SPACING_RATIO: f64 = 0.5;

// Multiple of the kernel lane count.
const UNORDERED_CHUNK: usize = 4096;

/// Electric and magnetic field samples at a set of points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldPair {
    pub e: Vec<CVec3>,
    pub h: Vec<CVec3>,
}

impl FieldPair {
    pub fn zeros(n: usize) -> Self {
        Self {
            e: vec![CVec3::ZERO; n],
            h: vec![CVec3::ZERO; n],
        }
    }

    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    pub fn negated(mut self) -> Self {
        self.e
            .iter_mut()
            .chain(self.h.iter_mut())
            .for_each(|v| *v = -*v);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.e.iter().chain(&self.h).all(|v| v.is_finite())
    }
}

/// Equivalent electric (J) and magnetic (M) surface current densities at the
/// nodes of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCurrents {
    pub mesh: Arc<SurfaceMesh>,
    pub j: Vec<CVec3>,
    pub m: Vec<CVec3>,
}

impl SurfaceCurrents {
    pub fn new(mesh: Arc<SurfaceMesh>, j: Vec<CVec3>, m: Vec<CVec3>) -> Result<Self> {
        if j.len() != mesh.len() || m.len() != mesh.len() {
            return Err(Error::invalid(format!(
                "current arrays ({}, {}) do not match {} mesh nodes",
                j.len(),
                m.len(),
                mesh.len()
            )));
        }
        Ok(Self { mesh, j, m })
    }

    pub fn zeros(mesh: Arc<SurfaceMesh>) -> Self {
        let n = mesh.len();
        Self {
            mesh,
            j: vec![CVec3::ZERO; n],
            m: vec![CVec3::ZERO; n],
        }
    }

    pub fn scaled(&self, s: num_complex::Complex64) -> Self {
        Self {
            mesh: self.mesh.clone(),
            j: self.j.iter().map(|&v| v.scale(s)).collect(),
            m: self.m.iter().map(|&v| v.scale(s)).collect(),
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(num_complex::Complex64::new(-1.0, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfTermMode {
    /// Observe on surfaces displaced by `offset` along ±n̂.
    OffsetSurfaces,
    /// Observe on the surface itself and drop the coincident node.
    ExcludeSelf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfTermPolicy {
    pub mode: SelfTermMode,
    pub offset: f64,
    /// Sub-sample source cells near the observation point.
    pub refine_near: bool,
}

impl Default for SelfTermPolicy {
    fn default() -> Self {
        Self {
            mode: SelfTermMode::OffsetSurfaces,
            offset: DEFAULT_OFFSET,
            refine_near: true,
        }
    }
}

impl SelfTermPolicy {
    pub fn offset_surfaces(offset: f64) -> Result<Self> {
        let p = Self {
            offset,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn exclude_self() -> Self {
        Self {
            mode: SelfTermMode::ExcludeSelf,
            offset: 0.0,
            refine_near: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == SelfTermMode::OffsetSurfaces
            && !(self.offset > 0.0 && self.offset.is_finite())
        {
            return Err(Error::invalid(format!(
                "offset-surface policy needs a positive offset, got {}",
                self.offset
            )));
        }
        Ok(())
    }
}

/// Reduction order over source nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Summation {
    /// Sources summed sequentially in node order: bitwise reproducible.
    #[default]
    Ordered,
    /// Source chunks reduced in parallel; results may differ in the last bits.
    Unordered,
}

/// Uniform spatial hash of source nodes for near-zone lookup.
struct NearIndex {
    cell: f64,
    bins: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl NearIndex {
    fn new(points: &[Vec3], cell: f64) -> Self {
        let mut bins: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            bins.entry(Self::key(*p, cell)).or_default().push(i);
        }
        Self { cell, bins }
    }

    fn key(p: Vec3, cell: f64) -> (i64, i64, i64) {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    }

    /// Indices within `sqrt(r2)` of `p`, in ascending order.
    fn within(&self, p: Vec3, points: &[Vec3], r2: f64, out: &mut Vec<usize>) {
        out.clear();
        let (kx, ky, kz) = Self::key(p, self.cell);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bin) = self.bins.get(&(kx + dx, ky + dy, kz + dz)) {
                        out.extend(
                            bin.iter()
                                .copied()
                                .filter(|&i| (p - points[i]).norm_sqr() < r2),
                        );
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

struct Prepared<'a> {
    mesh: &'a SurfaceMesh,
    scalar: KernelConsts,
    blocked: Option<(LosslessKernel, SourceBlock)>,
    wj: Vec<CVec3>,
    wm: Vec<CVec3>,
    near: NearIndex,
    near_r2: f64,
    sub_spacing: f64,
    refine: bool,
    exclude_self: bool,
}

impl Prepared<'_> {
    /// Far-zone sum over sources `[start, end)`; near-zone sources are skipped.
    fn far_sum(&self, obs: Vec3, start: usize, end: usize) -> (CVec3, CVec3) {
        match &self.blocked {
            Some((kern, block)) => kern.sum(block, obs, start, end, self.near_r2),
            None => {
                let mut e = CVec3::ZERO;
                let mut h = CVec3::ZERO;
                for s in start..end.min(self.mesh.len()) {
                    let src = self.mesh.nodes[s];
                    if (obs - src).norm_sqr() >= self.near_r2 {
                        self.scalar
                            .accumulate(obs, src, self.wj[s], self.wm[s], &mut e, &mut h);
                    }
                }
                (e, h)
            }
        }
    }

    fn padded_len(&self) -> usize {
        match &self.blocked {
            Some((_, block)) => block.padded_len(),
            None => self.mesh.len(),
        }
    }

    fn near_sum(&self, obs: Vec3) -> Result<(CVec3, CVec3)> {
        let mut e = CVec3::ZERO;
        let mut h = CVec3::ZERO;
        let mut idx = Vec::new();
        self.near
            .within(obs, &self.mesh.nodes, self.near_r2, &mut idx);
        let mut sub = Vec::new();
        for &s in &idx {
            let src = self.mesh.nodes[s];
            if (obs - src).norm_sqr() == 0.0 {
                if self.exclude_self {
                    continue;
                }
                return Err(Error::Singularity(0.0));
            }
            if self.refine {
                let w = self.mesh.weights[s];
                let (j, m) = (self.wj[s] * (1.0 / w), self.wm[s] * (1.0 / w));
                sub.clear();
                self.mesh.cell_subpoints(s, self.sub_spacing, &mut sub);
                for &(p, ws) in &sub {
                    self.scalar
                        .accumulate(obs, p, j * ws, m * ws, &mut e, &mut h);
                }
            } else {
                self.scalar
                    .accumulate(obs, src, self.wj[s], self.wm[s], &mut e, &mut h);
            }
        }
        Ok((e, h))
    }
}

/// Radiate `currents` through the dyads of `medium` to the points `obs`.
pub fn radiate(
    currents: &SurfaceCurrents,
    medium: &Medium,
    obs: &[Vec3],
    policy: &SelfTermPolicy,
    summation: Summation,
) -> Result<FieldPair> {
    policy.validate()?;
    let mesh = currents.mesh.as_ref();
    if currents.j.len() != mesh.len() || currents.m.len() != mesh.len() {
        return Err(Error::invalid("currents do not match their mesh"));
    }
    let refine =
        policy.refine_near && policy.mode == SelfTermMode::OffsetSurfaces && mesh.radius.is_some();
    let near = NEAR_ZONE_CELLS * mesh.max_cell_size();
    let wj: Vec<CVec3> = currents
        .j
        .iter()
        .zip(&mesh.weights)
        .map(|(&j, &w)| j * w)
        .collect();
    let wm: Vec<CVec3> = currents
        .m
        .iter()
        .zip(&mesh.weights)
        .map(|(&m, &w)| m * w)
        .collect();
    let blocked = LosslessKernel::new(medium).map(|k| (k, SourceBlock::new(&mesh.nodes, &wj, &wm)));
    let prep = Prepared {
        mesh,
        scalar: KernelConsts::new(medium),
        blocked,
        wj,
        wm,
        near: NearIndex::new(&mesh.nodes, near),
        near_r2: near * near,
        sub_spacing: SUB_SPACING_RATIO * policy.offset,
        refine,
        exclude_self: policy.mode == SelfTermMode::ExcludeSelf,
    };
    let total = prep.padded_len();

    let eval = |p: Vec3| -> Result<(CVec3, CVec3)> {
        let (ef, hf) = match summation {
            Summation::Ordered => prep.far_sum(p, 0, total),
            Summation::Unordered => {
                let starts: Vec<usize> = (0..total).step_by(UNORDERED_CHUNK).collect();
                starts
                    .into_par_iter()
                    .map(|s| prep.far_sum(p, s, (s + UNORDERED_CHUNK).min(total)))
                    .reduce(|| (CVec3::ZERO, CVec3::ZERO), |a, b| (a.0 + b.0, a.1 + b.1))
            }
        };
        let (en, hn) = prep.near_sum(p)?;
        Ok((ef + en, hf + hn))
    };
    let pairs: Vec<(CVec3, CVec3)> = obs.par_iter().map(|&p| eval(p)).collect::<Result<_>>()?;
    let (e, h) = pairs.into_iter().unzip();
    Ok(FieldPair { e, h })
}

/// Boundary-condition deviation `δE = E^i + E⁺ − E⁻`, `δH = H^i + H⁺ − H⁻`.
pub fn deviation(incident: &FieldPair, plus: &FieldPair, minus: &FieldPair) -> Result<FieldPair> {
    let n = incident.len();
    let lens = [
        incident.h.len(),
        plus.e.len(),
        plus.h.len(),
        minus.e.len(),
        minus.h.len(),
    ];
    if lens.iter().any(|&l| l != n) {
        return Err(Error::invalid("field samples have mismatched lengths"));
    }
    let combine = |i: &[CVec3], p: &[CVec3], m: &[CVec3]| -> Vec<CVec3> {
        i.iter()
            .zip(p)
            .zip(m)
            .map(|((&i, &p), &m)| i + p - m)
            .collect()
    };
    Ok(FieldPair {
        e: combine(&incident.e, &plus.e, &minus.e),
        h: combine(&incident.h, &plus.h, &minus.h),
    })
}

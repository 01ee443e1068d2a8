//! Quadrature-ready discretizations of closed smooth surfaces.
//!
//! The sphere is sampled on a tensor-product (θ, φ) grid with cell-centred θ
//! rows, so no node sits on a pole and every area weight `R² sinθ Δθ Δφ` is
//! strictly positive. Node `k` lives at row `k / n_phi`, column `k % n_phi`.

use crate::error::{Error, Result};
use crate::vector::Vec3;
use std::f64::consts::PI;

/// Default sampling density in nodes per wavelength of arc.
pub const DEFAULT_DENSITY: f64 = 10.0;

/// Which side of the surface an evaluation point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Exterior (along the outward normal).
    Plus,
    /// Interior.
    Minus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub nodes: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub weights: Vec<f64>,
    /// `(n_theta, n_phi)`
    pub grid_shape: (usize, usize),
    pub radius: Option<f64>,
    theta: Vec<f64>,
    phi: Vec<f64>,
    dtheta: f64,
    dphi: f64,
}

impl SurfaceMesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Cell-centre polar angles, one per grid row.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Azimuth of each grid column.
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `(row, column)` of a node index.
    pub fn grid_index(&self, node: usize) -> (usize, usize) {
        (node / self.grid_shape.1, node % self.grid_shape.1)
    }

    /// Largest edge length of any cell.
    pub fn max_cell_size(&self) -> f64 {
        let r = self.radius.unwrap_or(1.0);
        (r * self.dtheta).max(r * self.dphi)
    }

    /// Tensor-product sub-quadrature of one cell with point spacing no larger
    /// than `max_spacing`. Points and weights are appended to `out`.
    pub fn cell_subpoints(&self, node: usize, max_spacing: f64, out: &mut Vec<(Vec3, f64)>) {
        let r = self
            .radius
            .expect("cell subdivision requires a sphere mesh");
        let (it, ip) = self.grid_index(node);
        let t0 = self.theta[it] - 0.5 * self.dtheta;
        let p0 = self.phi[ip] - 0.5 * self.dphi;
        let widest = (self.theta[it] + 0.5 * self.dtheta)
            .sin()
            .max((self.theta[it] - 0.5 * self.dtheta).sin());
        let n_t = ((r * self.dtheta / max_spacing).ceil() as usize).max(1);
        let n_p = ((r * widest * self.dphi / max_spacing).ceil() as usize).max(1);
        let ht = self.dtheta / n_t as f64;
        let hp = self.dphi / n_p as f64;
        for a in 0..n_t {
            let (st, ct) = (t0 + (a as f64 + 0.5) * ht).sin_cos();
            let w = r * r * st * ht * hp;
            for b in 0..n_p {
                let (sp, cp) = (p0 + (b as f64 + 0.5) * hp).sin_cos();
                out.push((Vec3::new(r * st * cp, r * st * sp, r * ct), w));
            }
        }
    }
}

/// Tensor-product sphere mesh centred at the origin.
///
/// `n_theta = ceil(π R density)` rows and `n_phi = ceil(2π R density)` columns.
pub fn make_sphere_mesh(radius: f64, density: f64) -> Result<SurfaceMesh> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!(
            "sphere radius must be positive, got {radius}"
        )));
    }
    if !(density >= 4.0 && density.is_finite()) {
        return Err(Error::invalid(format!(
            "density must be at least 4, got {density}"
        )));
    }
    let n_theta = (PI * radius * density).ceil() as usize;
    let n_phi = (2.0 * PI * radius * density).ceil() as usize;
    let dtheta = PI / n_theta as f64;
    let dphi = 2.0 * PI / n_phi as f64;

    let theta: Vec<f64> = (0..n_theta).map(|i| (i as f64 + 0.5) * dtheta).collect();
    let phi: Vec<f64> = (0..n_phi).map(|j| j as f64 * dphi).collect();

    let n = n_theta * n_phi;
    let mut nodes = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &t in &theta {
        let (st, ct) = t.sin_cos();
        let w = radius * radius * st * dtheta * dphi;
        for &p in &phi {
            let (sp, cp) = p.sin_cos();
            let normal = Vec3::new(st * cp, st * sp, ct);
            nodes.push(normal * radius);
            normals.push(normal);
            weights.push(w);
        }
    }

    Ok(SurfaceMesh {
        nodes,
        normals,
        weights,
        grid_shape: (n_theta, n_phi),
        radius: Some(radius),
        theta,
        phi,
        dtheta,
        dphi,
    })
}

/// Nodes displaced by `offset` along the normal: outward for `Side::Plus`,
/// inward for `Side::Minus`.
pub fn offset_points(mesh: &SurfaceMesh, side: Side, offset: f64) -> Result<Vec<Vec3>> {
    if !(offset > 0.0 && offset.is_finite()) {
        return Err(Error::invalid(format!(
            "offset must be positive, got {offset}"
        )));
    }
    let sign = match side {
        Side::Plus => 1.0,
        Side::Minus => {
            if let Some(r) = mesh.radius {
                if offset >= r {
                    return Err(Error::DegenerateOffset { offset, radius: r });
                }
            }
            -1.0
        }
    };
    Ok(mesh
        .nodes
        .iter()
        .zip(&mesh.normals)
        .map(|(&p, &n)| p + n * (sign * offset))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_sphere_area_and_radius() {
        let m = make_sphere_mesh(1.0, 10.0).unwrap();
        let area = m.total_area();
        assert!(((area - 4.0 * PI) / (4.0 * PI)).abs() < 1e-3);
        for p in &m.nodes {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_shape_follows_density() {
        let m = make_sphere_mesh(3.0, 10.0).unwrap();
        assert_eq!(m.grid_shape, (95, 189));
        assert_eq!(m.len(), 95 * 189);
    }

    #[test]
    fn normals_are_unit_and_outward() {
        let m = make_sphere_mesh(2.0, 6.0).unwrap();
        for (p, n) in m.nodes.iter().zip(&m.normals) {
            assert!((n.norm() - 1.0).abs() < 1e-12);
            assert!(p.dot(*n) > 0.0);
        }
        assert!(m.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            make_sphere_mesh(0.0, 10.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            make_sphere_mesh(-1.0, 10.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            make_sphere_mesh(1.0, 3.9),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn offsets_displace_along_normal() {
        let m = make_sphere_mesh(1.0, 10.0).unwrap();
        // Build a pole-like node by hand on the same mesh type.
        let mut single = m.clone();
        single.nodes = vec![Vec3::Z];
        single.normals = vec![Vec3::Z];
        single.weights = vec![1.0];
        let up = offset_points(&single, Side::Plus, 0.05).unwrap();
        let down = offset_points(&single, Side::Minus, 0.05).unwrap();
        assert!((up[0] - Vec3::new(0.0, 0.0, 1.05)).norm() < 1e-15);
        assert!((down[0] - Vec3::new(0.0, 0.0, 0.95)).norm() < 1e-15);
        assert!(matches!(
            offset_points(&m, Side::Minus, 2.0),
            Err(Error::DegenerateOffset { .. })
        ));
        assert!(offset_points(&m, Side::Plus, 0.0).is_err());
    }

    #[test]
    fn quadrature_error_shrinks_with_density() {
        let exact = 4.0 * PI * 4.0;
        let e10 = (make_sphere_mesh(2.0, 10.0).unwrap().total_area() - exact).abs();
        let e20 = (make_sphere_mesh(2.0, 20.0).unwrap().total_area() - exact).abs();
        assert!(e20 < e10);
    }

    #[test]
    fn subcells_cover_the_cell() {
        let m = make_sphere_mesh(1.0, 10.0).unwrap();
        let mut pts = Vec::new();
        for k in [0, 40, m.len() / 2] {
            pts.clear();
            m.cell_subpoints(k, 0.01, &mut pts);
            let w: f64 = pts.iter().map(|p| p.1).sum();
            assert!((w - m.weights[k]).abs() / m.weights[k] < 2e-3);
            assert!(pts.iter().all(|(p, _)| (p.norm() - 1.0).abs() < 1e-12));
        }
    }
}

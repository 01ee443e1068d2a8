//! Oracles shared by the integration test targets.
#![allow(dead_code)]

use iesc::geometry::make_sphere_mesh;
use iesc::radiate::SurfaceCurrents;
use iesc::vector::{CVec3, Vec3};
use num_complex::Complex64;
use std::sync::Arc;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Fields of a z-directed electric dipole of moment `il` at the origin, in
/// spherical components `(E_r, E_θ, H_φ)`.
pub fn electric_dipole(
    k: f64,
    eta: f64,
    il: f64,
    r: f64,
    theta: f64,
) -> (Complex64, Complex64, Complex64) {
    let kr = k * r;
    let ph = (-J * kr).exp();
    let inv = 1.0 / (J * kr);
    let er = eta * il * theta.cos() / (2.0 * std::f64::consts::PI * r * r) * (1.0 + inv) * ph;
    let et = J * eta * k * il * theta.sin() / (4.0 * std::f64::consts::PI * r)
        * (1.0 + inv - 1.0 / (kr * kr))
        * ph;
    let hp = J * k * il * theta.sin() / (4.0 * std::f64::consts::PI * r) * (1.0 + inv) * ph;
    (er, et, hp)
}

pub fn spherical_basis(p: Vec3) -> (Vec3, Vec3, Vec3, f64, f64) {
    let r = p.norm();
    let theta = (p.z / r).acos();
    let phi = p.y.atan2(p.x);
    let rh = p * (1.0 / r);
    let th = Vec3::new(
        theta.cos() * phi.cos(),
        theta.cos() * phi.sin(),
        -theta.sin(),
    );
    let ph = Vec3::new(-phi.sin(), phi.cos(), 0.0);
    (rh, th, ph, r, theta)
}

/// A sphere mesh carrying a current on one node only.
pub fn single_node(j: CVec3, m: CVec3) -> (SurfaceCurrents, Vec3, f64) {
    let mesh = Arc::new(make_sphere_mesh(0.3, 10.0).unwrap());
    let node = mesh.len() / 3;
    let mut cur = SurfaceCurrents::zeros(mesh.clone());
    cur.j[node] = j;
    cur.m[node] = m;
    (cur, mesh.nodes[node], mesh.weights[node])
}

use iesc::geometry::{make_sphere_mesh, offset_points, Side};
use iesc::greens::Medium;
use iesc::radiate::{radiate, SelfTermPolicy, Summation, SurfaceCurrents};
use iesc::vector::{CVec3, Vec3};
use num_complex::Complex64;
use std::sync::Arc;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Smooth, non-symmetric test currents, optionally restricted to one
/// hemisphere.
fn pattern(
    mesh: &Arc<iesc::geometry::SurfaceMesh>,
    seed: f64,
    upper: Option<bool>,
) -> SurfaceCurrents {
    let mut j = Vec::with_capacity(mesh.len());
    let mut m = Vec::with_capacity(mesh.len());
    for p in &mesh.nodes {
        let keep = upper.is_none_or(|u| (p.z > 0.0) == u);
        let s = if keep { 1.0 } else { 0.0 };
        let a = (seed * p.x + 1.3 * p.y).sin();
        let b = (seed * p.z - 0.7 * p.x).cos();
        j.push(CVec3::new(c(a, b), c(b, -a * seed), c(0.3 * a, 0.1)) * s);
        m.push(CVec3::new(c(-b, 0.2), c(a, a), c(seed, -b)) * (300.0 * s));
    }
    SurfaceCurrents::new(mesh.clone(), j, m).unwrap()
}

fn max_rel(a: &[CVec3], b: &[CVec3]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).norm())
        .fold(0.0, f64::max)
        / scale
}

#[test]
fn radiation_is_linear() {
    let mesh = Arc::new(make_sphere_mesh(0.6, 10.0).unwrap());
    let obs = offset_points(&mesh, Side::Plus, 0.025).unwrap();
    let policy = SelfTermPolicy::default();
    let (alpha, beta) = (c(0.7, -1.3), c(-2.0, 0.4));
    for medium in [Medium::vacuum(), Medium::new(c(2.0, -0.2), 1.0).unwrap()] {
        let a = pattern(&mesh, 1.1, None);
        let b = pattern(&mesh, -0.4, None);
        let mixed = SurfaceCurrents::new(
            mesh.clone(),
            a.j.iter()
                .zip(&b.j)
                .map(|(x, y)| x.scale(alpha) + y.scale(beta))
                .collect(),
            a.m.iter()
                .zip(&b.m)
                .map(|(x, y)| x.scale(alpha) + y.scale(beta))
                .collect(),
        )
        .unwrap();
        let fa = radiate(&a, &medium, &obs, &policy, Summation::Ordered).unwrap();
        let fb = radiate(&b, &medium, &obs, &policy, Summation::Ordered).unwrap();
        let fm = radiate(&mixed, &medium, &obs, &policy, Summation::Ordered).unwrap();
        let combine = |x: &[CVec3], y: &[CVec3]| -> Vec<CVec3> {
            x.iter()
                .zip(y)
                .map(|(p, q)| p.scale(alpha) + q.scale(beta))
                .collect()
        };
        assert!(max_rel(&fm.e, &combine(&fa.e, &fb.e)) < 1e-12);
        assert!(max_rel(&fm.h, &combine(&fa.h, &fb.h)) < 1e-12);
    }
}

/// Reaction `⟨a, b⟩ = Σ w (J_b · E_a − M_b · H_a)` at the nodes.
fn reaction(field: &iesc::radiate::FieldPair, b: &SurfaceCurrents) -> Complex64 {
    let mesh = &b.mesh;
    (0..mesh.len())
        .map(|k| (b.j[k].dot(field.e[k]) - b.m[k].dot(field.h[k])) * mesh.weights[k])
        .sum()
}

#[test]
fn disjoint_sources_are_reciprocal() {
    let mesh = Arc::new(make_sphere_mesh(0.6, 10.0).unwrap());
    let policy = SelfTermPolicy::exclude_self();
    for medium in [Medium::vacuum(), Medium::dielectric(2.0).unwrap()] {
        let a = pattern(&mesh, 0.9, Some(true));
        let b = pattern(&mesh, -1.7, Some(false));
        let fa = radiate(&a, &medium, &mesh.nodes, &policy, Summation::Ordered).unwrap();
        let fb = radiate(&b, &medium, &mesh.nodes, &policy, Summation::Ordered).unwrap();
        let ab = reaction(&fa, &b);
        let ba = reaction(&fb, &a);
        assert!((ab - ba).norm() / ab.norm() < 1e-10, "{ab} vs {ba}");
    }
}

#[test]
fn summation_orders_agree_closely() {
    let mesh = Arc::new(make_sphere_mesh(0.8, 10.0).unwrap());
    let obs = offset_points(&mesh, Side::Minus, 0.025).unwrap();
    let cur = pattern(&mesh, 0.3, None);
    let medium = Medium::dielectric(2.0).unwrap();
    let policy = SelfTermPolicy::default();
    let a = radiate(&cur, &medium, &obs, &policy, Summation::Ordered).unwrap();
    let b = radiate(&cur, &medium, &obs, &policy, Summation::Unordered).unwrap();
    assert!(max_rel(&a.e, &b.e) < 1e-12);
    assert!(max_rel(&a.h, &b.h) < 1e-12);
    let again = radiate(&cur, &medium, &obs, &policy, Summation::Ordered).unwrap();
    assert_eq!(a.e, again.e);
    assert_eq!(a.h, again.h);
}

#[test]
fn far_field_decays_as_inverse_distance() {
    let mesh = Arc::new(make_sphere_mesh(0.5, 10.0).unwrap());
    let cur = pattern(&mesh, 0.5, None);
    let dir = Vec3::new(0.2, -0.3, 0.9).normalized().unwrap();
    let obs = vec![dir * 1e4, dir * 2e4];
    let f = radiate(
        &cur,
        &Medium::vacuum(),
        &obs,
        &SelfTermPolicy::exclude_self(),
        Summation::Ordered,
    )
    .unwrap();
    let ratio = f.e[0].norm() / f.e[1].norm();
    assert!((ratio - 2.0).abs() < 1e-3, "{ratio}");
    // Transverse far field: E ⟂ r̂ and |E| = η |H|.
    assert!(f.e[1].dot_real(dir).norm() < 1e-3 * f.e[1].norm());
    assert!((f.e[1].norm() / f.h[1].norm() / iesc::greens::ETA0 - 1.0).abs() < 1e-3);
}

//! Free-space kernels against finite differences and closed-form dipoles.

use iesc::greens::{dyads, grad_green, scalar_green, Medium, ETA0, K0};
use iesc::radiate::{radiate, SelfTermPolicy, Summation};
use iesc::vector::{CVec3, Vec3};
use num_complex::Complex64;
use proptest::prelude::*;
mod common;

use common::{electric_dipole, single_node, spherical_basis};

const J: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn media() -> Vec<Medium> {
    vec![
        Medium::vacuum(),
        Medium::dielectric(2.0).unwrap(),
        Medium::new(c(3.0, -0.4), 1.0).unwrap(),
    ]
}

#[test]
fn scalar_green_solves_helmholtz() {
    let h = 5e-4;
    for m in media() {
        let k = m.wavenumber;
        for &r in &[0.3, 0.9, 2.4] {
            let g = |r: f64| scalar_green(k, r).unwrap();
            // Radial Laplacian of a spherically symmetric function.
            let lap =
                (g(r + h) - 2.0 * g(r) + g(r - h)) / (h * h) + (g(r + h) - g(r - h)) / (h * r);
            let residual = (lap + k * k * g(r)).norm() / (k * k * g(r)).norm();
            assert!(residual < 1e-5, "k {k} r {r}: {residual}");
        }
    }
}

#[test]
fn gradient_matches_central_differences() {
    let h = 1e-5;
    let src = Vec3::new(0.1, -0.2, 0.05);
    for m in media() {
        let k = m.wavenumber;
        for obs in [Vec3::new(0.7, 0.3, -0.4), Vec3::new(-1.5, 2.0, 0.3)] {
            let g = |p: Vec3| scalar_green(k, (p - src).norm()).unwrap();
            let analytic = grad_green(k, obs, src).unwrap();
            let fd = CVec3::new(
                (g(obs + Vec3::X * h) - g(obs - Vec3::X * h)) / (2.0 * h),
                (g(obs + Vec3::Y * h) - g(obs - Vec3::Y * h)) / (2.0 * h),
                (g(obs + Vec3::Z * h) - g(obs - Vec3::Z * h)) / (2.0 * h),
            );
            let err = (analytic - fd).norm() / analytic.norm();
            assert!(err < 1e-6, "{err}");
        }
    }
}

fn rel(a: CVec3, b: CVec3) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn single_node_matches_hertzian_dipole() {
    let vac = Medium::vacuum();
    let (cur, at, w) = single_node(Vec3::Z.to_complex(), CVec3::ZERO);
    let policy = SelfTermPolicy::exclude_self();
    let dirs = [
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.3, -0.5, 0.8),
        Vec3::new(-0.2, 0.6, -0.7),
    ];
    for kr in [50.0, 2.0] {
        let r = kr / K0;
        let obs: Vec<Vec3> = dirs
            .iter()
            .map(|d| at + d.normalized().unwrap() * r)
            .collect();
        let f = radiate(&cur, &vac, &obs, &policy, Summation::Ordered).unwrap();
        for (i, d) in dirs.iter().enumerate() {
            let (rh, th, ph, r, theta) = spherical_basis(*d * (r / d.norm()));
            let (er, et, hp) = electric_dipole(K0, ETA0, w, r, theta);
            let e = rh.to_complex().scale(er) + th.to_complex().scale(et);
            let h = ph.to_complex().scale(hp);
            assert!(rel(f.e[i], e) < 1e-3, "kR {kr}: E {}", rel(f.e[i], e));
            assert!(rel(f.h[i], h) < 1e-3, "kR {kr}: H {}", rel(f.h[i], h));
        }
    }
}

#[test]
fn magnetic_node_is_dual_of_electric_node() {
    // A magnetic dipole M radiates E = −η H_e and H = E_e / η of the
    // electric dipole with J = M / η.
    let vac = Medium::vacuum();
    let (ce, _, _) = single_node(Vec3::Z.to_complex(), CVec3::ZERO);
    let (cm, at, _) = single_node(CVec3::ZERO, Vec3::Z.to_complex().scale(c(ETA0, 0.0)));
    let obs = vec![
        at + Vec3::new(0.4, 2.0, -1.1),
        at + Vec3::new(-3.0, 0.2, 0.5),
    ];
    let policy = SelfTermPolicy::exclude_self();
    let fe = radiate(&ce, &vac, &obs, &policy, Summation::Ordered).unwrap();
    let fm = radiate(&cm, &vac, &obs, &policy, Summation::Ordered).unwrap();
    for i in 0..obs.len() {
        assert!(rel(fm.e[i], fe.h[i].scale(c(-ETA0, 0.0))) < 1e-12);
        assert!(rel(fm.h[i], fe.e[i].scale(c(1.0 / ETA0, 0.0))) < 1e-12);
    }
}

#[test]
fn radiated_fields_satisfy_faraday_and_ampere() {
    let h = 1e-5;
    for m in media() {
        let (cur, at, _) = single_node(
            CVec3::new(c(0.3, 0.1), c(-1.0, 0.0), c(0.2, 0.4)),
            CVec3::new(c(40.0, 0.0), c(0.0, -25.0), c(10.0, 5.0)),
        );
        let p = at + Vec3::new(0.35, -0.2, 0.5);
        let stencil = |d: Vec3| vec![p + d * h, p - d * h];
        let mut obs = vec![p];
        for d in [Vec3::X, Vec3::Y, Vec3::Z] {
            obs.extend(stencil(d));
        }
        let f = radiate(
            &cur,
            &m,
            &obs,
            &SelfTermPolicy::exclude_self(),
            Summation::Ordered,
        )
        .unwrap();
        let curl = |v: &[CVec3]| {
            let d = |axis: usize, comp: usize| {
                (v[1 + 2 * axis].components()[comp] - v[2 + 2 * axis].components()[comp])
                    / (2.0 * h)
            };
            CVec3::new(d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0))
        };
        let faraday = f.h[0].scale(-J * m.omega_mu());
        let ampere = f.e[0].scale(J * m.omega_eps());
        assert!(
            rel(curl(&f.e), faraday) < 1e-6,
            "{}",
            rel(curl(&f.e), faraday)
        );
        assert!(
            rel(curl(&f.h), ampere) < 1e-6,
            "{}",
            rel(curl(&f.h), ampere)
        );
    }
}

fn point() -> impl Strategy<Value = Vec3> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #[test]
    fn dyads_reciprocal_and_dual(p in point(), q in point(), eps in 1.0..6.0f64, loss in 0.0..0.5f64) {
        prop_assume!((p - q).norm() > 1e-2);
        let m = Medium::new(c(eps, -loss), 1.0).unwrap();
        let a = dyads(&m, p, q).unwrap();
        let b = dyads(&m, q, p).unwrap();
        let tol = 1e-12;
        prop_assert!((a.e_j - b.e_j.transpose()).max_abs() <= tol * a.e_j.max_abs());
        prop_assert!((a.h_m - b.h_m.transpose()).max_abs() <= tol * a.h_m.max_abs());
        // G_H^J(p, q) = −G_E^M(p, q), and swapping the points flips the curl.
        prop_assert!((a.h_j - a.e_m.scale(c(-1.0, 0.0))).max_abs() <= tol * a.h_j.max_abs());
        prop_assert!((a.h_j - b.h_j.scale(c(-1.0, 0.0))).max_abs() <= tol * a.h_j.max_abs());
        let lhs = a.h_m.scale(1.0 / (-J * m.omega_eps()));
        let rhs = a.e_j.scale(1.0 / (-J * m.omega_mu()));
        prop_assert!((lhs - rhs).max_abs() <= tol * rhs.max_abs());
    }
}

//! Incident fields: linearly polarized plane wave and paraxial fundamental
//! Gaussian beam. Both use `e^{+jωt}`, so a wave travelling along `k̂`
//! carries the phase `e^{−jk k̂·r}`.

use crate::error::{Error, Result};
use crate::greens::Medium;
use crate::radiate::FieldPair;
use crate::vector::{CVec3, Vec3};
use num_complex::Complex64;
use std::f64::consts::PI;

const ORTHO_TOL: f64 = 1e-12;

fn unit(v: Vec3, what: &str) -> Result<Vec3> {
    v.normalized()
        .ok_or_else(|| Error::invalid(format!("{what} must be a non-zero finite vector")))
}

fn real_k_eta(medium: &Medium) -> Result<(f64, f64)> {
    if medium.wavenumber.im != 0.0 || medium.impedance.im != 0.0 {
        return Err(Error::invalid(
            "incident fields require a lossless background medium",
        ));
    }
    Ok((medium.wavenumber.re, medium.impedance.re))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub amplitude: Complex64,
    pub propagation: Vec3,
    pub polarization: Vec3,
    pub wavenumber: f64,
    pub impedance: f64,
}

impl PlaneWave {
    /// Direction vectors are normalized; the polarization must be transverse.
    pub fn new(
        amplitude: Complex64,
        propagation: Vec3,
        polarization: Vec3,
        background: &Medium,
    ) -> Result<Self> {
        let propagation = unit(propagation, "propagation")?;
        let polarization = unit(polarization, "polarization")?;
        if propagation.dot(polarization).abs() >= ORTHO_TOL {
            return Err(Error::invalid("plane-wave polarization is not transverse"));
        }
        let (wavenumber, impedance) = real_k_eta(background)?;
        Ok(Self {
            amplitude,
            propagation,
            polarization,
            wavenumber,
            impedance,
        })
    }

    pub fn e_at(&self, p: Vec3) -> CVec3 {
        let phase = Complex64::new(0.0, -self.wavenumber * self.propagation.dot(p)).exp();
        self.polarization.to_complex().scale(self.amplitude * phase)
    }

    pub fn field(&self, points: &[Vec3]) -> FieldPair {
        let e: Vec<CVec3> = points.iter().map(|&p| self.e_at(p)).collect();
        let h = e
            .iter()
            .map(|&e| CVec3::real_cross(self.propagation, e) * (1.0 / self.impedance))
            .collect();
        FieldPair { e, h }
    }
}

/// Fundamental paraxial Gaussian beam focused at `focus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBeam {
    pub waist: f64,
    pub focus: Vec3,
    pub axis: Vec3,
    pub polarization: Vec3,
    pub amplitude: Complex64,
    pub wavenumber: f64,
    pub impedance: f64,
}

impl GaussianBeam {
    pub fn new(
        waist: f64,
        focus: Vec3,
        axis: Vec3,
        polarization: Vec3,
        amplitude: Complex64,
        background: &Medium,
    ) -> Result<Self> {
        let (wavenumber, impedance) = real_k_eta(background)?;
        let wavelength = 2.0 * PI / wavenumber;
        if !(waist >= 0.5 * wavelength) || !waist.is_finite() {
            return Err(Error::invalid(format!(
                "beam waist {waist} is below the paraxial limit of half a wavelength"
            )));
        }
        let axis = unit(axis, "beam axis")?;
        let polarization = unit(polarization, "polarization")?;
        if axis.dot(polarization).abs() >= ORTHO_TOL {
            return Err(Error::invalid(
                "beam polarization is not transverse to the axis",
            ));
        }
        Ok(Self {
            waist,
            focus,
            axis,
            polarization,
            amplitude,
            wavenumber,
            impedance,
        })
    }

    /// `z_R = π w² / λ`.
    pub fn rayleigh_range(&self) -> f64 {
        0.5 * self.wavenumber * self.waist * self.waist
    }

    /// Beam radius `w(z)` at axial distance `z` from the focus.
    pub fn radius_at(&self, z: f64) -> f64 {
        let zr = self.rayleigh_range();
        self.waist * (1.0 + (z / zr).powi(2)).sqrt()
    }

    pub fn e_at(&self, p: Vec3) -> CVec3 {
        let d = p - self.focus;
        let z = self.axis.dot(d);
        let rho2 = (d.norm_sqr() - z * z).max(0.0);
        let zr = self.rayleigh_range();
        let wz = self.radius_at(z);
        let inv_curv = z / (z * z + zr * zr);
        let gouy = (z / zr).atan();
        let k = self.wavenumber;
        let envelope = (self.waist / wz) * (-rho2 / (wz * wz)).exp();
        let phase = -(k * z + 0.5 * k * rho2 * inv_curv - gouy);
        let f = self.amplitude * envelope * Complex64::new(0.0, phase).exp();
        self.polarization.to_complex().scale(f)
    }

    pub fn field(&self, points: &[Vec3]) -> FieldPair {
        let e: Vec<CVec3> = points.iter().map(|&p| self.e_at(p)).collect();
        let h = e
            .iter()
            .map(|&e| CVec3::real_cross(self.axis, e) * (1.0 / self.impedance))
            .collect();
        FieldPair { e, h }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Plane(PlaneWave),
    Gaussian(GaussianBeam),
}

impl Source {
    pub fn field(&self, points: &[Vec3]) -> FieldPair {
        match self {
            Source::Plane(pw) => pw.field(points),
            Source::Gaussian(gb) => gb.field(points),
        }
    }

    pub fn amplitude(&self) -> Complex64 {
        match self {
            Source::Plane(pw) => pw.amplitude,
            Source::Gaussian(gb) => gb.amplitude,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::ETA0;

    fn c1() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn x_pol_down() -> PlaneWave {
        PlaneWave::new(c1(), -Vec3::Z, Vec3::X, &Medium::vacuum()).unwrap()
    }

    #[test]
    fn plane_wave_at_origin() {
        let f = x_pol_down().field(&[Vec3::ZERO]);
        assert!((f.e[0] - Vec3::X.to_complex()).norm() < 1e-15);
        let h_expected = Vec3::new(0.0, -1.0 / ETA0, 0.0).to_complex();
        assert!((f.h[0] - h_expected).norm() < 1e-15);
        assert!((f.h[0].y.re + 2.6544e-3).abs() < 1e-7);
    }

    #[test]
    fn plane_wave_half_wavelength_phase() {
        let f = x_pol_down().field(&[Vec3::new(0.0, 0.0, 0.5)]);
        assert!((f.e[0] - (-Vec3::X).to_complex()).norm() < 1e-15);
    }

    #[test]
    fn plane_wave_impedance_and_orthogonality() {
        let pw = PlaneWave::new(
            Complex64::new(0.3, -2.0),
            Vec3::new(1.0, 2.0, -0.5),
            Vec3::new(2.0, -1.0, 0.0),
            &Medium::vacuum(),
        )
        .unwrap();
        let pts = [Vec3::new(0.1, 0.7, -3.0), Vec3::new(5.0, -2.0, 1.0)];
        let f = pw.field(&pts);
        for (e, h) in f.e.iter().zip(&f.h) {
            assert!((e.norm() / h.norm() - ETA0).abs() / ETA0 < 1e-12);
            assert!(e.dot_real(pw.propagation).norm() < 1e-12);
            assert!(h.dot_real(pw.propagation).norm() < 1e-12);
            // E·H* and E·H both vanish for a linearly polarized wave.
            assert!(e.dot(*h).norm() < 1e-12 * e.norm() * h.norm());
        }
    }

    #[test]
    fn plane_wave_rejects_longitudinal_polarization() {
        assert!(
            PlaneWave::new(c1(), Vec3::Z, Vec3::new(0.0, 1.0, 1.0), &Medium::vacuum()).is_err()
        );
    }

    fn beam() -> GaussianBeam {
        GaussianBeam::new(2.0, Vec3::ZERO, -Vec3::Z, Vec3::X, c1(), &Medium::vacuum()).unwrap()
    }

    #[test]
    fn gaussian_focus_values() {
        let b = beam();
        assert!((b.e_at(Vec3::ZERO).norm() - 1.0).abs() < 1e-15);
        let edge = b.e_at(Vec3::new(2.0, 0.0, 0.0)).norm();
        assert!((edge - (-1.0f64).exp()).abs() < 1e-15);
        assert!((b.rayleigh_range() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn gaussian_rejects_tight_waist() {
        assert!(
            GaussianBeam::new(0.4, Vec3::ZERO, Vec3::Z, Vec3::X, c1(), &Medium::vacuum()).is_err()
        );
    }

    #[test]
    fn gaussian_phase_advances_along_axis() {
        // On axis the phase is kz − Gouy with z measured along the propagation axis.
        let b = beam();
        let z = 0.3;
        let e = b.e_at(Vec3::new(0.0, 0.0, -z)).x;
        let expected = -(2.0 * PI * z - (z / b.rayleigh_range()).atan());
        let got = e.arg();
        assert!((got - expected).abs() < 1e-12);
    }
}

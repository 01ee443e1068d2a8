//! Experiment configuration files.
//!
//! TOML with one table per concern; every length is in wavelengths.
//!
//! ```toml
//! [surface]
//! radius = 3.0
//!
//! [media]
//! eps_rel_interior = 2.0      # or [re, im]
//!
//! [source]
//! kind = "gaussian"           # or "planewave"
//! waist = 2.0
//!
//! [solver]
//! max_iters = 10
//! record_maps = true
//!
//! [sweep]
//! radii = [2.0, 3.0, 4.0, 5.0]
//! ```

use crate::error::{Error, Result};
use crate::geometry::{make_sphere_mesh, SurfaceMesh, DEFAULT_DENSITY};
use crate::greens::Medium;
use crate::iesc::{BandLimit, SolverConfig};
use crate::incident::{GaussianBeam, PlaneWave, Source};
use crate::radiate::{SelfTermMode, SelfTermPolicy, Summation, DEFAULT_OFFSET};
use crate::vector::Vec3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub radius: Option<f64>,
    /// Nodes per wavelength of arc.
    pub density: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Gaussian,
    Planewave,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub kind: Option<SourceKind>,
    pub waist: Option<f64>,
    pub polarization: Option<[f64; 3]>,
    /// Propagation direction (beam axis).
    pub direction: Option<[f64; 3]>,
    pub amplitude: Option<f64>,
    /// Beam focus; defaults to the point where the axis enters the sphere.
    pub focus: Option<[f64; 3]>,
}

/// A permittivity given either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Permittivity {
    Real(f64),
    Complex([f64; 2]),
}

impl Permittivity {
    pub fn value(self) -> Complex64 {
        match self {
            Permittivity::Real(re) => Complex64::new(re, 0.0),
            Permittivity::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediaSection {
    pub eps_rel_interior: Option<Permittivity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelfTermKind {
    Offset,
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SummationKind {
    Ordered,
    Unordered,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub relaxation: Option<f64>,
    pub update_sign: Option<f64>,
    pub self_term: Option<SelfTermKind>,
    pub offset: Option<f64>,
    pub refine_near: Option<bool>,
    pub record_maps: Option<bool>,
    pub summation: Option<SummationKind>,
    /// Taper the corrections in spherical-harmonic degree.
    pub band_limit: Option<bool>,
    pub band_pass: Option<f64>,
    pub band_stop: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    pub directory: Option<PathBuf>,
    /// Far-field and Mie comparison tables for plane-wave runs.
    pub farfield: Option<bool>,
    /// Scattering angles sampled over `[0°, 180°]` per plane.
    pub angles: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub radii: Option<Vec<f64>>,
}

/// The file as written, and after [`ConfigFile::fill_defaults`] the file as
/// run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub surface: SurfaceSection,
    #[serde(default)]
    pub source: SourceSection,
    #[serde(default)]
    pub media: MediaSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

macro_rules! fill {
    ($slot:expr, $value:expr, $key:literal, $out:ident) => {
        if $slot.is_none() {
            let v = $value;
            $out.push(format!("{} = {:?}", $key, v));
            $slot = Some(v);
        }
    };
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.message().to_string();
            let key = match unknown_field(&msg) {
                Some(f) if path == "." => f.to_string(),
                Some(f) if !path.ends_with(f) => format!("{path}.{f}"),
                _ => path,
            };
            Error::config(key, msg)
        })
    }

    /// Fill every unset optional field; returns `key = value` for each.
    pub fn fill_defaults(&mut self) -> Vec<String> {
        let mut out = Vec::new();
        let defaults = SolverConfig::default();
        let band = BandLimit::default();
        fill!(
            self.surface.density,
            DEFAULT_DENSITY,
            "surface.density",
            out
        );
        fill!(self.source.kind, SourceKind::Gaussian, "source.kind", out);
        fill!(self.source.waist, 2.0, "source.waist", out);
        fill!(
            self.source.polarization,
            [1.0, 0.0, 0.0],
            "source.polarization",
            out
        );
        fill!(
            self.source.direction,
            [0.0, 0.0, -1.0],
            "source.direction",
            out
        );
        fill!(self.source.amplitude, 1.0, "source.amplitude", out);
        fill!(
            self.solver.max_iters,
            defaults.max_iters,
            "solver.max_iters",
            out
        );
        fill!(self.solver.tol, defaults.tol, "solver.tol", out);
        fill!(
            self.solver.relaxation,
            defaults.relaxation,
            "solver.relaxation",
            out
        );
        fill!(
            self.solver.update_sign,
            defaults.update_sign,
            "solver.update_sign",
            out
        );
        fill!(
            self.solver.self_term,
            SelfTermKind::Offset,
            "solver.self_term",
            out
        );
        fill!(self.solver.offset, DEFAULT_OFFSET, "solver.offset", out);
        fill!(self.solver.refine_near, true, "solver.refine_near", out);
        fill!(self.solver.record_maps, false, "solver.record_maps", out);
        fill!(
            self.solver.summation,
            SummationKind::Ordered,
            "solver.summation",
            out
        );
        fill!(self.solver.band_limit, true, "solver.band_limit", out);
        fill!(self.solver.band_pass, band.pass, "solver.band_pass", out);
        fill!(self.solver.band_stop, band.stop, "solver.band_stop", out);
        fill!(
            self.outputs.directory,
            PathBuf::from("out"),
            "outputs.directory",
            out
        );
        fill!(self.outputs.farfield, true, "outputs.farfield", out);
        fill!(self.outputs.angles, 181, "outputs.angles", out);
        out
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}

fn unknown_field(msg: &str) -> Option<&str> {
    let rest = msg.strip_prefix("unknown field `")?;
    rest.split('`').next()
}

/// One solver run of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunDescriptor {
    pub radius: f64,
    pub directory: PathBuf,
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// The effective file, every field set.
    pub file: ConfigFile,
    /// Keys that were filled from defaults, as `key = value`.
    pub defaulted: Vec<String>,
    pub radii: Vec<f64>,
    pub density: f64,
    pub kind: SourceKind,
    pub eps_rel_interior: Complex64,
    pub solver: SolverConfig,
    pub directory: PathBuf,
    pub farfield: bool,
    pub angles: usize,
    pub swept: bool,
}

/// Read and validate a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_toml(&text)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file = ConfigFile::parse(text)?;
        Self::from_file(file)
    }

    pub fn from_file(mut file: ConfigFile) -> Result<Self> {
        let defaulted = file.fill_defaults();
        let swept = file.sweep.radii.is_some();
        let radii = match (&file.sweep.radii, file.surface.radius) {
            (Some(r), _) if r.is_empty() => {
                return Err(Error::config(
                    "sweep.radii",
                    "sweep needs at least one radius",
                ))
            }
            (Some(r), _) => r.clone(),
            (None, Some(r)) => vec![r],
            (None, None) => {
                return Err(Error::config(
                    "surface.radius",
                    "missing; set it or sweep.radii",
                ))
            }
        };
        let key = if swept {
            "sweep.radii"
        } else {
            "surface.radius"
        };
        for &r in &radii {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config(
                    key,
                    format!("radius must be positive, got {r}"),
                ));
            }
        }
        let density = file.surface.density.unwrap();
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::config(
                "surface.density",
                format!("density must be positive, got {density}"),
            ));
        }
        let eps = file
            .media
            .eps_rel_interior
            .ok_or_else(|| Error::config("media.eps_rel_interior", "missing"))?
            .value();
        Medium::new(eps, 1.0)
            .map_err(|e| Error::config("media.eps_rel_interior", e.to_string()))?;

        let s = &file.solver;
        let self_policy = match s.self_term.unwrap() {
            SelfTermKind::Offset => SelfTermPolicy {
                mode: SelfTermMode::OffsetSurfaces,
                offset: s.offset.unwrap(),
                refine_near: s.refine_near.unwrap(),
            },
            SelfTermKind::Exclude => SelfTermPolicy::exclude_self(),
        };
        self_policy
            .validate()
            .map_err(|e| Error::config("solver.offset", e.to_string()))?;
        let band_limit = s.band_limit.unwrap().then(|| BandLimit {
            pass: s.band_pass.unwrap(),
            stop: s.band_stop.unwrap(),
        });
        let solver = SolverConfig {
            max_iters: s.max_iters.unwrap(),
            tol: s.tol.unwrap(),
            relaxation: s.relaxation.unwrap(),
            update_sign: s.update_sign.unwrap(),
            self_policy,
            record_maps: s.record_maps.unwrap(),
            summation: match s.summation.unwrap() {
                SummationKind::Ordered => Summation::Ordered,
                SummationKind::Unordered => Summation::Unordered,
            },
            band_limit,
        };
        validate_solver(&solver)?;

        let angles = file.outputs.angles.unwrap();
        if angles < 2 {
            return Err(Error::config("outputs.angles", "need at least two angles"));
        }
        let cfg = Self {
            defaulted,
            radii,
            density,
            kind: file.source.kind.unwrap(),
            eps_rel_interior: eps,
            solver,
            directory: file.outputs.directory.clone().unwrap(),
            farfield: file.outputs.farfield.unwrap(),
            angles,
            swept,
            file,
        };
        for &r in &cfg.radii {
            cfg.source(r)?;
            if cfg.kind == SourceKind::Planewave && cfg.farfield {
                crate::mie::sphere_solution(r, eps)
                    .map_err(|e| Error::config(key, e.to_string()))?;
            }
        }
        Ok(cfg)
    }

    /// One descriptor per radius; sweeps write to `R<radius>` subdirectories.
    pub fn runs(&self, root: Option<&Path>) -> Vec<RunDescriptor> {
        let root = root.unwrap_or(&self.directory);
        self.radii
            .iter()
            .map(|&radius| RunDescriptor {
                radius,
                directory: if self.swept {
                    root.join(format!("R{radius}"))
                } else {
                    root.to_path_buf()
                },
            })
            .collect()
    }

    pub fn mesh(&self, radius: f64) -> Result<SurfaceMesh> {
        make_sphere_mesh(radius, self.density)
    }

    pub fn exterior(&self) -> Medium {
        Medium::vacuum()
    }

    pub fn interior(&self) -> Result<Medium> {
        Medium::new(self.eps_rel_interior, 1.0)
    }

    pub fn source(&self, radius: f64) -> Result<Source> {
        let s = &self.file.source;
        let direction = Vec3::from_array(s.direction.unwrap());
        let polarization = Vec3::from_array(s.polarization.unwrap());
        let amplitude = Complex64::new(s.amplitude.unwrap(), 0.0);
        let ext = self.exterior();
        let err = |key: &'static str| move |e: Error| Error::config(key, e.to_string());
        match self.kind {
            SourceKind::Planewave => Ok(Source::Plane(
                PlaneWave::new(amplitude, direction, polarization, &ext)
                    .map_err(err("source.polarization"))?,
            )),
            SourceKind::Gaussian => {
                let focus = match s.focus {
                    Some(f) => Vec3::from_array(f),
                    None => {
                        let axis = direction.normalized().ok_or_else(|| {
                            Error::config("source.direction", "direction is zero")
                        })?;
                        axis * (-radius)
                    }
                };
                let waist = s.waist.unwrap();
                let beam =
                    GaussianBeam::new(waist, focus, direction, polarization, amplitude, &ext)
                        .map_err(|e| {
                            let key = if waist < 0.5 || !waist.is_finite() {
                                "source.waist"
                            } else {
                                "source.polarization"
                            };
                            Error::config(key, e.to_string())
                        })?;
                Ok(Source::Gaussian(beam))
            }
        }
    }
}

fn validate_solver(s: &SolverConfig) -> Result<()> {
    let checks: [(&str, bool); 5] = [
        ("solver.max_iters", s.max_iters >= 1),
        ("solver.tol", s.tol > 0.0 && s.tol.is_finite()),
        (
            "solver.relaxation",
            s.relaxation > 0.0 && s.relaxation <= 1.0,
        ),
        (
            "solver.update_sign",
            s.update_sign == 1.0 || s.update_sign == -1.0,
        ),
        (
            "solver.band_stop",
            s.band_limit.is_none_or(|b| b.validate().is_ok()),
        ),
    ];
    for (key, ok) in checks {
        if !ok {
            return Err(Error::config(key, format!("{key} is out of range")));
        }
    }
    s.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_toml("surface.radius = 3\nmedia.eps_rel_interior = 2\n")
            .unwrap();
        assert_eq!(cfg.radii, vec![3.0]);
        assert_eq!(cfg.density, 10.0);
        assert_eq!(cfg.file.source.waist, Some(2.0));
        assert_eq!(cfg.solver.max_iters, 10);
        assert!(cfg
            .defaulted
            .iter()
            .any(|d| d.starts_with("surface.density")));
        assert!(!cfg
            .defaulted
            .iter()
            .any(|d| d.starts_with("surface.radius")));
    }

    #[test]
    fn errors_name_the_key() {
        let bad = [
            (
                "surface.radius = 3\nmedia.eps_rel_interior = -1\n",
                "media.eps_rel_interior",
            ),
            (
                "surface.radius = 3\nmedia.eps_rel_interior = \"two\"\n",
                "media.eps_rel_interior",
            ),
            (
                "surface.radius = 3\nmedia.eps_rel_interior = 2\nsolver.colour = 1\n",
                "solver.colour",
            ),
            (
                "surface.radius = 3\nmedia.eps_rel_interior = 2\n[extra]\n",
                "extra",
            ),
            (
                "surface.radius = 3\nmedia.eps_rel_interior = 2\nsolver.max_iters = 1.5\n",
                "solver.max_iters",
            ),
            (
                "surface.radius = 0\nmedia.eps_rel_interior = 2\n",
                "surface.radius",
            ),
            (
                "surface.radius = 3\nmedia.eps_rel_interior = 2\nsource.waist = 0.1\n",
                "source.waist",
            ),
            ("media.eps_rel_interior = 2\n", "surface.radius"),
        ];
        for (text, key) in bad {
            match ExperimentConfig::from_toml(text) {
                Err(Error::Config { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn sweep_expands_to_runs() {
        let cfg = ExperimentConfig::from_toml(
            "media.eps_rel_interior = 2\n[sweep]\nradii = [2, 3, 4, 5]\n",
        )
        .unwrap();
        let runs = cfg.runs(Some(Path::new("/tmp/x")));
        assert_eq!(runs.len(), 4);
        assert_eq!(runs[1].directory, Path::new("/tmp/x/R3"));
    }

    #[test]
    fn effective_file_round_trips() {
        let cfg =
            ExperimentConfig::from_toml("surface.radius = 2\nmedia.eps_rel_interior = [2, -0.1]\n")
                .unwrap();
        let again = ExperimentConfig::from_toml(&cfg.file.to_toml()).unwrap();
        assert_eq!(again.file, cfg.file);
        assert!(again.defaulted.is_empty());
        assert_eq!(again.eps_rel_interior, Complex64::new(2.0, -0.1));
    }
}

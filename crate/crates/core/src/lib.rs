//! Iterative equivalent-surface-current scattering from smooth dielectric
//! bodies, with a Lorenz–Mie reference for spheres.
//!
//! All lengths are expressed in free-space wavelengths.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod error;
pub mod geometry;
pub mod greens;
pub mod iesc;
pub mod incident;
mod kernel;
pub mod mie;
pub mod radiate;
pub mod spectral;
pub mod vector;

pub use error::{Error, Result};

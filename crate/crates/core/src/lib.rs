//! Toeplitz quantization of Hamiltonians on the Bargmann–Fock plane and the
//! Riemann sphere, with partial Bergman densities, their rescaled spectral
//! measures and the limit laws they obey.
//!
//! `erf` throughout is the standard normal cumulative
//! `∫_{-∞}^x e^{-s²/2} ds/√(2π)`, not the classical error function.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod basis;
pub mod bfmodel;
pub mod error;
pub mod geometry;
pub mod special;
pub mod spectral;
pub mod toeplitz;

pub type C64 = num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use asymptotics::{erf, ProfileTable, RateFit};
pub use basis::{build_basis, eval_density, QuadratureRule, SectionBasis};
pub use bfmodel::LiftedPoint;
pub use error::{LabError, Result};
pub use geometry::{fields_at, FieldKind, FlowResult, GeometryModel, HamiltonianSpec, ModelKind};
pub use spectral::{PointMeasure, Scaling, SmoothingKernel};
pub use toeplitz::{build_toeplitz, diagonalize, Mode, SpectralData, ToeplitzMatrix};

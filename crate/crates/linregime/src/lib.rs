//! Linearized two-layer models on the sphere.
//!
//! Random-features and neural-tangent regression, kernel ridge regression,
//! Gegenbauer spectra of rotation-invariant kernels, low-degree projections,
//! and an experiment runner that writes CSV records.

pub mod error;
pub mod experiment;
pub mod krr;
pub mod labkit;
pub mod linalg;
pub mod linmodels;
pub mod projection;
pub mod quad;
pub mod seeding;
pub mod specialfn;
pub mod spectrum;
pub mod sphere;

pub use error::{Error, Result};

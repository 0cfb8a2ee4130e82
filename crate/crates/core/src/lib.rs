//! Low-rank matrix recovery from rank-one projection (ROP) measurements.
//!
//! Measurements are `b_j = beta_j^T X gamma_j`. The crate provides the
//! operators and noise models, Schatten-p and least-q recovery programs,
//! PhaseLift, empirical `l_q`-RUB certification with the resulting error
//! bounds, and a deterministic experiment harness.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

// Negated comparisons are how NaN arguments get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certification;
pub mod error;
pub mod harness;
pub mod io;
pub mod matrix_core;
pub mod measurement;
pub mod scalar;
pub mod solvers;

pub use error::{Result, RopError};
pub use scalar::Scalar;

pub type Matrix = matrix_core::DenseMatrix<f64>;
pub type Matrix32 = matrix_core::DenseMatrix<f32>;
pub type Ensemble = measurement::RopEnsemble<f64>;
pub type Ensemble32 = measurement::RopEnsemble<f32>;
pub type Measurements = measurement::MeasurementVector<f64>;
pub type Report = solvers::RecoveryReport<f64>;
pub type Config = solvers::SolverConfig<f64>;
pub type Constraint = solvers::ConstraintSpec<f64>;
pub type Noise = measurement::NoiseSpec<f64>;

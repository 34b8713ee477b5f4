//! Phase-space information metric, estimation bounds and POVM audits for a
//! single qubit.
//!
//! Everything numerical is generic over [`real::Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

// `!(a < b)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod derivatives;
pub mod error;
pub mod measurement;
pub mod metrics;
pub mod phasespace;
pub mod quadrature;
pub mod qubit;
pub mod real;

pub use error::{Error, Result};

pub type Mat2 = qubit::Complex2x2<f64>;
pub type State = qubit::QubitState<f64>;
pub type Metric = metrics::Metric3<f64>;
pub type Quad = quadrature::QuadSpec<f64>;
pub type Context = measurement::EstimationContext<f64>;
pub type SweepRow = bounds::SweepRow<f64>;

//! Nonlinear least-square-error precoding for the multi-user MIMO downlink: per-antenna
//! constrained solvers, replica-method predictions of their large-system distortion, and
//! a Monte Carlo harness to check one against the other.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases below fix `f64`.

// `!(x > 0)` is deliberate throughout: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod precoders;
pub mod quadrature;
pub mod replica;
pub mod scalar;

pub use error::{LseError, Result};
pub use scalar::Real;

pub type Matrix = linalg::CMatrix<f64>;
pub type Constraint = model::ConstraintSet<f64>;
pub type Params = model::SystemParams<f64>;
pub type Ensemble = model::ChannelEnsemble<f64>;
pub type Solver = precoders::Precoder<f64>;
pub type RsPoint = replica::RsSolution<f64>;
pub type RsbPoint = replica::RsbSolution<f64>;

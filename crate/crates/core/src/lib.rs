//! Adoption dynamics of a network service with a linear externality,
//! uniform user affinities and constant-level cost subsidies.
//!
//! The model code is generic over the scalar type. Piecewise-linear parts
//! ([`model`]) accept any [`Real`], including exact rationals; everything that
//! needs `exp`/`ln` takes a floating-point [`Scalar`]. The aliases below fix
//! the common choices.

// negated comparisons are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod scenarios;
pub mod subsidy;
pub mod trajectory;
pub mod validation;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Exact rational scalar.
pub type Exact = num_rational::Ratio<i64>;

pub type Params = model::ModelParams<f64>;
pub type ExactParams = model::ModelParams<Exact>;
pub type Trajectory = trajectory::PiecewiseTrajectory<f64>;

//! Numeric abstractions the model is written against.
//!
//! [`Real`] is the field needed for the piecewise-linear parts of the model
//! (would-adopt map, equilibria, stability). It is implemented by `f32`,
//! `f64` and exact rationals such as `Ratio<i64>`. [`Scalar`] adds the
//! transcendental functions required by trajectories, durations and costs.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Ordered field with lossy conversion to and from `f64`.
pub trait Real:
    Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + PartialOrd
    + Copy
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, panicking only if the target cannot represent it.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn clamp_unit(self) -> Self {
        self.max_of(Self::zero()).min_of(Self::one())
    }
}

impl<T> Real for T where
    T: Num
        + Signed
        + FromPrimitive
        + ToPrimitive
        + PartialOrd
        + Copy
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Floating-point scalar: f32 or f64.
pub trait Scalar: Real + Float {}

impl<T: Real + Float> Scalar for T {}

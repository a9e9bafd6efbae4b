//! Scalar abstractions shared by the analytic layers and the agent-based model.

use std::fmt::{Debug, Display};

use num_rational::Rational64;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like scalar used for payoffs, proportions and utility accounting.
///
/// Implemented for `f32`, `f64` and [`Rational64`]. The rational instance has
/// zero tolerances, so simplex checks on it are exact.
pub trait Scalar:
    Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Largest accepted `|p_S + p_I + p_C - 1|` for a simplex point.
    fn sum_tolerance() -> Self;
    /// Most negative component accepted (and clipped to zero) for a simplex point.
    fn component_floor() -> Self;

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar")
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar")
    }
}

impl Scalar for f64 {
    fn sum_tolerance() -> Self {
        1e-9
    }
    fn component_floor() -> Self {
        -1e-12
    }
}

impl Scalar for f32 {
    fn sum_tolerance() -> Self {
        1e-5
    }
    fn component_floor() -> Self {
        -1e-6
    }
}

impl Scalar for Rational64 {
    fn sum_tolerance() -> Self {
        Rational64::from_integer(0)
    }
    fn component_floor() -> Self {
        Rational64::from_integer(0)
    }
}

/// Floating-point scalar, required wherever square roots, logarithms or
/// iterative numerics are involved.
pub trait Real: Scalar + Float {}

impl<T: Scalar + Float> Real for T {}

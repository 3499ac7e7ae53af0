//! Scalar abstraction for the state-vector and density-matrix kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point type the simulator is generic over.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Tolerance used for structural checks (norm, trace, hermiticity, unitarity).
    fn structural_tolerance() -> Self;

    /// Slack allowed below zero when checking positive semidefiniteness.
    fn eigenvalue_slack() -> Self;

    /// Lossy conversion from `f64`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    fn structural_tolerance() -> Self {
        1e-10
    }

    fn eigenvalue_slack() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn structural_tolerance() -> Self {
        1e-4
    }

    fn eigenvalue_slack() -> Self {
        1e-4
    }
}

//! Floating-point scalar abstraction.
//!
//! Everything in the evaluation layers (`jones`, `sequences`, `jets`,
//! `analysis`) is generic over [`Scalar`] so the same code runs in `f32` or
//! `f64`. The solver in [`crate::designer`] is `f64`-only: its convergence
//! tolerances (1e-10 residual norms) are below single-precision resolution.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, NumAssign};

/// Real scalar type usable throughout the evaluation layers.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; used for constants and tolerances.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant converts to any Scalar")
    }

    /// Unitarity tolerance for the fidelity precondition check.
    fn unitarity_tol() -> Self;
}

impl Scalar for f64 {
    fn unitarity_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn unitarity_tol() -> Self {
        1e-4
    }
}

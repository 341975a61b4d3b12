//! Scalar abstractions shared by the model, LP and wage code.

use std::fmt::{Debug, Display};

use num::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Field operations the simplex engine needs, plus the tolerances it
/// applies when deciding signs. Exact types use zero tolerances.
pub trait LpScalar:
    Clone + PartialOrd + Debug + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync
{
    /// Reduced costs at or below this count as non-improving.
    fn cost_tol() -> Self;
    /// Smallest admissible pivot magnitude in the ratio test.
    fn pivot_tol() -> Self;
    /// Basic values within this band of zero are treated as zero.
    fn feas_tol() -> Self;
}

impl LpScalar for f64 {
    fn cost_tol() -> Self {
        1e-11
    }
    fn pivot_tol() -> Self {
        1e-10
    }
    fn feas_tol() -> Self {
        1e-12
    }
}

impl LpScalar for f32 {
    fn cost_tol() -> Self {
        1e-5
    }
    fn pivot_tol() -> Self {
        1e-5
    }
    fn feas_tol() -> Self {
        1e-6
    }
}

impl LpScalar for BigRational {
    fn cost_tol() -> Self {
        BigRational::zero()
    }
    fn pivot_tol() -> Self {
        BigRational::zero()
    }
    fn feas_tol() -> Self {
        BigRational::zero()
    }
}

/// Floating scalar used by the model, wage and analysis layers.
pub trait Real: Float + FromPrimitive + LpScalar + Copy + Debug + Display + Send + Sync + 'static {}

impl<T> Real for T where T: Float + FromPrimitive + LpScalar + Copy + Debug + Display + Send + Sync + 'static {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable")
}

/// Lossy conversion back to `f64` for reporting.
#[inline]
pub fn to_f64<T: ToPrimitive>(x: &T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

//! Floating-point scalar abstraction shared by the numeric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point element type: `f32` or `f64`.
///
/// Feature storage is usually `f32`; the clustering kernels widen every
/// element to `f64` before accumulating, so both widths give the same
/// reduction order.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + serde::Serialize
    + for<'de> serde::Deserialize<'de>
    + 'static
{
    /// Relative machine tolerance used by iterative special functions.
    const EPS: Self;
    /// Smallest magnitude kept away from zero in continued fractions.
    const TINY: Self;

    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("literal representable")
    }

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable")
    }

    fn widen(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Scalar for f32 {
    const EPS: f32 = 1.0e-7;
    const TINY: f32 = 1.0e-30;
}

impl Scalar for f64 {
    const EPS: f64 = 1.0e-15;
    const TINY: f64 = 1.0e-300;
}

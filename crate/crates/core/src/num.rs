//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the library is generic over: `f32` or `f64`.
///
/// Automatically implemented for every type satisfying the super-traits.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + FromStr
    + Display
    + LowerExp
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Lossy cast from an `f64` constant.
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant convertible to Real")
    }

    /// Lossy cast from a `usize`.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("usize convertible to Real")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum<T>
        + FromStr
        + Display
        + LowerExp
        + Debug
        + Send
        + Sync
        + 'static
{
}

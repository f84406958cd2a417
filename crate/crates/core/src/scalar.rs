//! Scalar abstraction: all numerical code in this crate is generic over the
//! floating-point type through this trait.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point scalar usable throughout the crate (f32 or f64).
pub trait Scalar:
    num_traits::Float
    + num_traits::FloatConst
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; used for literals and RNG draws.
    #[inline]
    fn from_f64(x: f64) -> Self {
        num_traits::NumCast::from(x).expect("f64 conversion")
    }

    /// Lossy conversion to `f64`; used for serialization and reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::NumCast::from(self).expect("f64 conversion")
    }

    /// Conversion from a count.
    #[inline]
    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for converting an `f64` literal into the working scalar type.
#[inline]
pub fn sc<T: Scalar>(x: f64) -> T {
    T::from_f64(x)
}

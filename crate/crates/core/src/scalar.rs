//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar the estimation pipeline is generic over.
///
/// Implemented for `f32` and `f64`. Everything the pipeline needs comes from
/// `nalgebra::RealField` (dense linear algebra), `rustfft::FftNum` (circular
/// convolutions) and `num_traits` conversions.
pub trait Real:
    nalgebra::RealField + Copy + rustfft::FftNum + num_traits::ToPrimitive + Sum + Debug + Display
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into the working scalar.
#[inline]
pub fn cast<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts a count into the working scalar.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    nalgebra::convert(n as f64)
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    num_traits::ToPrimitive::to_f64(&x).unwrap_or(f64::NAN)
}

//! Scalar abstraction: the whole library is generic over the floating-point
//! type through this trait, with `f64` as the supported precision for
//! production runs (the deep lineshape tails require resolving probabilities
//! near 1e-14, far below `f32` resolution).

use num_traits::{Float, FloatConst, NumAssign};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar usable for propagation, matrices and fits.
pub trait Real:
    Float + FloatConst + NumAssign + Sum + Display + LowerExp + Debug + rustfft::FftNum
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for pulling literal constants into the generic scalar type.
#[inline]
pub(crate) fn rf<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must convert to scalar type")
}

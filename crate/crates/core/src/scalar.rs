//! Scalar abstraction: the whole library is generic over the floating-point
//! type through this trait, with `f64` as the working default.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar usable everywhere in this crate.
///
/// Implemented for `f32` and `f64`. Tolerances quoted in the documentation
/// assume `f64`; single precision will not meet them.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for converting an `f64` constant into `Self`.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant converts to any Scalar")
    }

    /// Conversion from a grid index.
    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize converts to any Scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

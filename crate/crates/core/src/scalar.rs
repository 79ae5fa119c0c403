//! Floating point abstraction used by every numeric routine in the crate.
//!
//! All algorithms are written against [`Scalar`] so that the same code runs
//! in `f64` (the default everywhere) or `f32` when memory matters more than
//! the last few bits of the objective.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub trait Scalar:
    'static
    + Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable in scalar type")
    }

    /// Base-2 logarithm computed as `ln(x) / ln(2)`.
    ///
    /// Every cost in the crate goes through this one function so that two
    /// evaluations of the same arrangement are bitwise identical.
    #[inline]
    fn lg(self) -> Self {
        self.ln() / Self::lit(std::f64::consts::LN_2)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Lower clamp applied to coordinate differences before taking a logarithm.
pub const LOG_CLAMP: f64 = 1e-12;

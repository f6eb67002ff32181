//! Scalar abstraction for the numeric core.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};

/// Real floating-point scalar the dense linear algebra is generic over.
///
/// Implemented for f32 and f64; the rest of the crate uses the f64 aliases
/// exported from the crate root.
pub trait Scalar:
    Float + FloatConst + NumAssign + FromPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lift an f64 constant into the scalar type.
    fn r(x: f64) -> Self {
        Self::from_f64(x).expect("finite constant")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

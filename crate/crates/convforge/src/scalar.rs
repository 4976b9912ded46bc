//! Scalar abstraction the whole crate is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar with the conversions and constants the pipeline
/// needs. Implemented for `f32` and `f64`; the `f64` instantiation backs all
/// file formats and the CLI.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal; every literal used in this crate is exactly
    /// representable in `f32` too, so the conversion cannot fail.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal out of scalar range")
    }

    /// `f64` view for diagnostics and reports.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Scalar type the numerical core is generic over.
///
/// All formulas are written against this trait; `f32` runs them at reduced
/// precision, while the tolerances quoted in docs and tests assume `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into `Self` (lossy for `f32`).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant converts to Real")
    }

    /// `f64` view of the value, for error messages and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

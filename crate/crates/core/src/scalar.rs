use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps, NumCast};

/// Real scalar used by the floating-point paths: f32 or f64.
pub trait Scalar:
    Float + FromPrimitive + NumCast + NumAssignOps + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; exact for every value the crate feeds it
    /// that is representable in `Self`.
    fn of(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("f64 converts to every Scalar")
    }

    fn of_u64(v: u64) -> Self {
        <Self as NumCast>::from(v).expect("u64 converts to every Scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Round half away from zero. `Float::round` already has this behaviour; the
/// wrapper names the rounding rule at call sites.
#[inline]
pub fn round_half_away<T: Scalar>(v: T) -> T {
    v.round()
}

//! Floating-point scalar abstraction.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Scalar type every numeric routine in this crate is generic over.
///
/// Implemented for `f32` and `f64`. Kernel construction, estimation and
/// scoring all run in the scalar's native precision, so the documented
/// tolerances (e.g. the 1e-12 moment identities) hold for `f64`; for `f32`
/// the same identities hold at single precision.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + FromStr + Display + Debug + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for constants and integer counts
    /// that are known to be well inside the scalar's range.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant representable in scalar type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize count representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point type the simplex arithmetic and solvers are written against.
///
/// Privacy accounting and planning are always carried out in `f64`; only the
/// iterate arithmetic is generic.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance on `|sum(coords) - 1|` for a valid simplex point.
    const SIMPLEX_TOL: f64;

    /// Lossy conversion from `f64`; every `f64` maps to some value of `Self`.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    const SIMPLEX_TOL: f64 = 1e-9;
}

impl Scalar for f32 {
    // f32 cannot hold 1e-9 on a sum of O(100) terms.
    const SIMPLEX_TOL: f64 = 1e-5;
}

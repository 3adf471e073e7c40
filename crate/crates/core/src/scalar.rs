//! Floating point abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the toolkit computes in: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a literal. Panics only for values the type cannot hold at all (never for finite f64 input).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Relative tolerance floor for the precision at hand.
    fn tol(requested: f64) -> Self {
        Self::of(requested).max(Self::epsilon() * Self::of(64.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

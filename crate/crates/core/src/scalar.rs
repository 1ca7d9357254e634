//! Scalar abstraction shared by the numeric modules.
//!
//! The model math (state lattice, Q-table, softmax, TD update, closed-form
//! curves, Weibull fitting) is written against [`Scalar`] so it runs in
//! either `f32` or `f64`. The experiment harness is pinned to `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type usable by the model: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal or sample.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Round to the nearest integer, exact halves away from zero.
#[inline]
pub fn round_half_away<T: Scalar>(x: T) -> T {
    // `Float::round` already rounds half-way cases away from zero.
    x.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halves_round_away_from_zero() {
        assert_eq!(round_half_away(3.5_f64), 4.0);
        assert_eq!(round_half_away(-3.5_f64), -4.0);
        assert_eq!(round_half_away(2.5_f32), 3.0);
        assert_eq!(round_half_away(0.49_f64), 0.0);
    }

    #[test]
    fn lit_round_trips_f32() {
        assert_eq!(<f32 as Scalar>::lit(0.5), 0.5_f32);
        assert_eq!(<f64 as Scalar>::lit(-50.0).as_f64(), -50.0);
    }
}

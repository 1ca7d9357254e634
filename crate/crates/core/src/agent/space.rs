use crate::env::EvidenceParams;
use crate::error::{Error, Result};
use crate::scalar::{round_half_away, Scalar};

/// A lattice state, stored as a signed multiple of the resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct State(pub i64);

impl State {
    pub const ZERO: State = State(0);

    #[inline]
    pub fn steps(self) -> i64 {
        self.0
    }
}

/// The lattice `{-M, -M + delta, ..., 0, ..., M - delta, M}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateSpace<T> {
    m: T,
    delta: T,
    half: i64,
}

impl<T: Scalar> StateSpace<T> {
    pub fn new(m: T, delta: T) -> Result<Self> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(Error::config("space.delta", "must be > 0"));
        }
        if !(m > T::zero()) || !m.is_finite() {
            return Err(Error::config("space.m", "must be > 0"));
        }
        let ratio = (m / delta).as_f64();
        let half = ratio.round();
        if (ratio - half).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::config("space.m", format!("{m} is not a multiple of delta = {delta}")));
        }
        if half > 50_000_000.0 {
            return Err(Error::config("space.m", "lattice too large"));
        }
        Ok(Self { m, delta, half: half as i64 })
    }

    pub fn m(&self) -> T {
        self.m
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Number of lattice points, `2 M / delta + 1`.
    pub fn len(&self) -> usize {
        (2 * self.half + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest step count, `M / delta`.
    pub fn half_width(&self) -> i64 {
        self.half
    }

    #[inline]
    pub fn value(&self, s: State) -> T {
        T::lit(s.0 as f64) * self.delta
    }

    #[inline]
    pub fn index(&self, s: State) -> usize {
        (s.0 + self.half) as usize
    }

    #[inline]
    pub fn state_at(&self, index: usize) -> State {
        State(index as i64 - self.half)
    }

    pub fn contains(&self, s: State) -> bool {
        s.0.abs() <= self.half
    }

    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (-self.half..=self.half).map(State)
    }
}

/// Nearest lattice element; out-of-range values clamp to +-M, exact
/// midpoints round away from zero.
pub fn quantize<T: Scalar>(x: T, space: &StateSpace<T>) -> State {
    let k = round_half_away(x / space.delta);
    let h = space.half as f64;
    let k = k.as_f64();
    let k = if k.is_nan() { 0.0 } else { k.clamp(-h, h) };
    State(k as i64)
}

/// Accumulation dynamics: `s' = quantize(s + e)`.
///
/// The time step only converts step counts into milliseconds; the state
/// update uses a dimensionless unit step.
pub fn accumulate_state<T: Scalar>(s: State, e: T, _params: &EvidenceParams<T>, space: &StateSpace<T>) -> State {
    quantize(space.value(s) + e, space)
}

/// Extrema-detection dynamics: the state tracks only the current sample.
pub fn extrema_state<T: Scalar>(e: T, space: &StateSpace<T>) -> State {
    quantize(e, space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_space() -> StateSpace<f64> {
        StateSpace::new(100.0, 1.0).unwrap()
    }

    #[test]
    fn quantize_examples() {
        let sp = default_space();
        assert_eq!(quantize(0.45, &sp), State(0));
        assert_eq!(quantize(3.5, &sp), State(4));
        assert_eq!(quantize(-3.5, &sp), State(-4));
        assert_eq!(quantize(137.2, &sp), State(100));
        assert_eq!(quantize(-1e9, &sp), State(-100));
    }

    #[test]
    fn quantize_fine_lattice() {
        let sp = StateSpace::<f64>::new(100.0, 0.1).unwrap();
        assert_eq!(sp.len(), 2001);
        assert_eq!(quantize(0.37, &sp), State(4));
        assert!((sp.value(quantize(10.63, &sp)) - 10.6).abs() < 1e-12);
    }

    #[test]
    fn accumulate_examples() {
        let sp = default_space();
        let p = EvidenceParams::default();
        assert_eq!(accumulate_state(State(3), 0.6, &p, &sp), State(4));
        assert_eq!(accumulate_state(State(0), -0.4, &p, &sp), State(0));
        assert_eq!(accumulate_state(State(100), 2.0, &p, &sp), State(100));
    }

    #[test]
    fn extrema_examples() {
        let sp = default_space();
        assert_eq!(extrema_state(0.3, &sp), State(0));
        assert_eq!(extrema_state(4.7, &sp), State(5));
    }

    #[test]
    fn works_in_f32() {
        let sp = StateSpace::new(100.0_f32, 1.0).unwrap();
        assert_eq!(quantize(3.5_f32, &sp), State(4));
        assert_eq!(sp.value(State(-7)), -7.0_f32);
    }

    #[test]
    fn rejects_non_multiple_range() {
        assert!(StateSpace::new(10.5, 1.0).is_err());
        assert!(StateSpace::new(10.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn quantize_is_nearest_legal_state(x in -500.0f64..500.0, m in 1u32..200, fine in proptest::bool::ANY) {
            let delta = if fine { 0.5 } else { 1.0 };
            let sp = StateSpace::new(m as f64, delta).unwrap();
            let s = quantize(x, &sp);
            prop_assert!(sp.contains(s));
            let v = sp.value(s);
            let clamped = x.clamp(-(m as f64), m as f64);
            prop_assert!((v - clamped).abs() <= delta / 2.0 + 1e-9);
        }
    }
}

//! Bounded-accumulation reference curves and expected-reward optimization.
//!
//! Mean accuracy and decision time of a drift-diffusion process with drift
//! `k c`, unit noise and symmetric bounds at `+-b`:
//!
//! ```text
//! accuracy(c) = 1 / (1 + exp(-2 k c b))
//! rt(c)       = b / (k c) * tanh(k c b)
//! ```
//!
//! Expected reward charges errors and waiting as costs:
//! `ER(b) = r_correct * acc - |r_wrong| * (1 - acc) - |r_wait| * rt`.

use crate::env::RewardSet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Below this |k c b| the RT uses its series expansion.
pub const RT_SERIES_SWITCH: f64 = 1e-6;

/// Probability of a Right choice for signed coherence `c`.
pub fn accuracy_signed<T: Scalar>(c: T, b: T, k: T) -> T {
    let two = T::lit(2.0);
    T::one() / (T::one() + (-two * k * c * b).exp())
}

/// Accuracy as a function of evidence strength |c|.
pub fn accuracy_closed_form<T: Scalar>(c: T, b: T, k: T) -> T {
    accuracy_signed(c.abs(), b, k)
}

/// Mean decision time in steps. Even in `c`; tends to `b^2` as `c -> 0`.
pub fn rt_closed_form<T: Scalar>(c: T, b: T, k: T) -> T {
    let x = (k * c * b).abs();
    if x < T::lit(RT_SERIES_SWITCH) {
        // tanh(x)/x = 1 - x^2/3 + O(x^4)
        b * b * (T::one() - x * x / T::lit(3.0))
    } else {
        b * b * x.tanh() / x
    }
}

pub fn expected_reward<T: Scalar>(b: T, k: T, c: T, rewards: &RewardSet<T>) -> T {
    let acc = accuracy_closed_form(c, b, k);
    let rt = rt_closed_form(c, b, k);
    rewards.r_correct * acc - rewards.r_wrong.abs() * (T::one() - acc) - rewards.r_wait.abs() * rt
}

/// Grid `{0, step, 2 step, ..., b_max}` for the terminal-state search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BGrid<T> {
    pub b_max: T,
    pub b_step: T,
}

impl<T: Scalar> BGrid<T> {
    pub fn points(&self) -> Result<Vec<T>> {
        if !(self.b_step > T::zero()) || !self.b_step.is_finite() {
            return Err(Error::config("grid.b_step", "must be > 0"));
        }
        if !(self.b_max >= T::zero()) || !self.b_max.is_finite() {
            return Err(Error::config("grid.b_max", "must be >= 0"));
        }
        let n = (self.b_max / self.b_step + T::lit(1e-9)).floor().as_f64() as usize;
        Ok((0..=n).map(|i| T::lit(i as f64) * self.b_step).collect())
    }
}

/// Exhaustive grid search for the reward-maximizing terminal state.
/// Ties resolve to the smallest `b`.
pub fn optimal_terminal_state<T: Scalar>(k: T, c: T, rewards: &RewardSet<T>, grid: &BGrid<T>) -> Result<(T, T)> {
    let pts = grid.points()?;
    let mut best: Option<(T, T)> = None;
    for b in pts {
        let er = expected_reward(b, k, c, rewards);
        match best {
            Some((_, e)) if !(er > e) => {}
            _ => best = Some((b, er)),
        }
    }
    best.ok_or_else(|| Error::config("grid", "empty search grid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const K: f64 = 0.4;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy_closed_form(0.0, 20.0, K), 0.5);
        let expected = 1.0 / (1.0 + (-1.024f64).exp());
        assert!((accuracy_closed_form(0.064, 20.0, K) - expected).abs() < 1e-15);
        assert!((expected - 0.7357).abs() < 1e-4);
    }

    #[test]
    fn rt_examples() {
        assert_eq!(rt_closed_form(0.0, 20.0, K), 400.0);
        let v = rt_closed_form(0.064, 20.0, K);
        assert!((v - 20.0 / 0.0256 * 0.512f64.tanh()).abs() < 1e-9);
        assert!((v - 368.36).abs() < 0.01, "{v}");
    }

    #[test]
    fn rt_continuous_at_series_switch() {
        for b in [1.0, 20.0, 100.0] {
            let c_switch = RT_SERIES_SWITCH / (K * b);
            let below = rt_closed_form(c_switch * (1.0 - 1e-9), b, K);
            let above = rt_closed_form(c_switch * (1.0 + 1e-9), b, K);
            assert!((below - above).abs() < 1e-9, "b={b}: {below} vs {above}");
        }
    }

    #[test]
    fn expected_reward_at_zero_bound() {
        let r = RewardSet::default();
        assert!((expected_reward(0.0, K, 0.064, &r) + 15.0).abs() < 1e-12);
    }

    #[test]
    fn prohibitive_wait_cost_gives_zero_bound() {
        let r = RewardSet::nonstandard(20.0, -50.0, -1e6);
        let (b, _) = optimal_terminal_state(K, 0.064, &r, &BGrid { b_max: 100.0, b_step: 0.1 }).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn empty_grid_is_config_error() {
        let r = RewardSet::default();
        assert!(optimal_terminal_state(K, 0.064, &r, &BGrid { b_max: 10.0, b_step: 0.0 }).is_err());
    }

    /// Independent dense evaluation: ER on a 0.001 grid, locate the maximum.
    fn dense_argmax(c: f64, r: &RewardSet<f64>) -> f64 {
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..=100_000 {
            let b = i as f64 * 0.001;
            let acc = 1.0 / (1.0 + (-2.0 * K * c * b).exp());
            let rt = if b == 0.0 { 0.0 } else { b / (K * c) * (K * c * b).tanh() };
            let er = r.r_correct * acc + r.r_wrong * (1.0 - acc) + r.r_wait * rt;
            if er > best.1 {
                best = (b, er);
            }
        }
        best.0
    }

    #[test]
    fn optimality_regime_has_single_interior_maximum() {
        let r = RewardSet::new(500.0, -1200.0, -1.0).unwrap();
        let (b_star, _) = optimal_terminal_state(K, 0.064, &r, &BGrid { b_max: 100.0, b_step: 0.1 }).unwrap();
        // Frozen from the dense oracle: maximum at 10.615, nearest 0.1 grid point 10.6.
        assert!((dense_argmax(0.064, &r) - 10.615).abs() < 0.002);
        assert!((b_star - 10.6).abs() < 1e-9, "{b_star}");
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.1).collect();
        let er: Vec<f64> = grid.iter().map(|&b| expected_reward(b, K, 0.064, &r)).collect();
        let imax = er.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(imax > 0 && imax < grid.len() - 1);
        assert!(er[..imax].windows(2).all(|w| w[1] > w[0]));
        assert!(er[imax..].windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn optimum_non_decreasing_in_cbr() {
        let grid = BGrid { b_max: 100.0, b_step: 0.1 };
        let mut last = 0.0;
        for i in 0..30 {
            let cbr = 10f64.powf(-2.0 + i as f64 * 0.2);
            let r = RewardSet::new(500.0, -500.0 * cbr, -1.0).unwrap();
            let (b, _) = optimal_terminal_state(K, 0.064, &r, &grid).unwrap();
            assert!(b >= last, "cbr {cbr}: {b} < {last}");
            last = b;
        }
    }

    proptest! {
        #[test]
        fn symmetry(c in -1.0f64..1.0, b in 0.0f64..100.0, k in 0.01f64..5.0) {
            let a = accuracy_signed(c, b, k);
            let a_neg = accuracy_signed(-c, b, k);
            prop_assert!((a + a_neg - 1.0).abs() < 1e-12);
            prop_assert!((rt_closed_form(c, b, k) - rt_closed_form(-c, b, k)).abs() < 1e-12);
        }

        #[test]
        fn argmax_stable_under_refinement(
            rc in 1.0f64..1000.0, rw in 1.0f64..3000.0, rwait in 0.1f64..5.0,
            k in 0.1f64..2.0, c in 0.01f64..0.6,
        ) {
            let r = RewardSet::new(rc, -rw, -rwait).unwrap();
            let coarse = BGrid { b_max: 100.0, b_step: 0.2 };
            let fine = BGrid { b_max: 100.0, b_step: 0.1 };
            let (bc, ec) = optimal_terminal_state(k, c, &r, &coarse).unwrap();
            let (bf, ef) = optimal_terminal_state(k, c, &r, &fine).unwrap();
            for b in coarse.points().unwrap() {
                prop_assert!(expected_reward(b, k, c, &r) <= ec);
            }
            prop_assert!(ef >= ec - 1e-9);
            prop_assert!((bc - bf).abs() <= 0.2 + 1e-9, "coarse {} fine {}", bc, bf);
        }
    }
}

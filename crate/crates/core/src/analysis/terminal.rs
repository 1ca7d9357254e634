use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::stats;
use crate::agent::{Action, QTable, State, TrialRecord};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalMethod {
    Empirical,
    QtablePeak,
}

/// Location of the emergent decision bound, in lattice units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminalStateEstimate {
    pub b_mean: f64,
    pub b_std: f64,
    pub n: usize,
    pub method: TerminalMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("no completed (non-timed-out) trials in the window")]
pub struct EstimateUnavailable;

/// Mean and standard deviation of |terminal state| over the trailing
/// `window` trials, skipping timed-out trials.
pub fn empirical_terminal_state<T: Scalar>(
    records: &[TrialRecord<T>],
    window: usize,
) -> Result<TerminalStateEstimate, EstimateUnavailable> {
    let start = records.len().saturating_sub(window);
    let values: Vec<f64> = records[start..]
        .iter()
        .filter(|r| !r.timed_out)
        .map(|r| r.terminal_value.abs().as_f64())
        .collect();
    if values.is_empty() {
        return Err(EstimateUnavailable);
    }
    Ok(TerminalStateEstimate {
        b_mean: stats::mean(&values),
        b_std: stats::std_dev(&values),
        n: values.len(),
        method: TerminalMethod::Empirical,
    })
}

/// States where each terminating action dominates both alternatives, taking
/// the one with the largest value on its own side: `(left_peak, right_peak)`.
pub fn qtable_terminal_states<T: Scalar>(q: &QTable<T>) -> (Option<State>, Option<State>) {
    let mut left: Option<(State, T)> = None;
    let mut right: Option<(State, T)> = None;
    for (s, row) in q.rows() {
        let (l, r, w) = (row[Action::Left.index()], row[Action::Right.index()], row[Action::Wait.index()]);
        if s.steps() > 0 && r > w && r > l && right.is_none_or(|(_, best)| r > best) {
            right = Some((s, r));
        }
        if s.steps() < 0 && l > w && l > r && left.is_none_or(|(_, best)| l > best) {
            left = Some((s, l));
        }
    }
    (left.map(|x| x.0), right.map(|x| x.0))
}

/// Symmetric Q-table peak estimate (mean of |left| and |right| peak values).
pub fn qtable_terminal_estimate<T: Scalar>(q: &QTable<T>) -> Option<TerminalStateEstimate> {
    let (l, r) = qtable_terminal_states(q);
    let vals: Vec<f64> = [l, r]
        .into_iter()
        .flatten()
        .map(|s| q.space().value(s).abs().as_f64())
        .collect();
    if vals.is_empty() {
        return None;
    }
    Some(TerminalStateEstimate {
        b_mean: stats::mean(&vals),
        b_std: stats::std_dev(&vals),
        n: vals.len(),
        method: TerminalMethod::QtablePeak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::StateSpace;

    fn rec(terminal: i64, timed_out: bool) -> TrialRecord<f64> {
        TrialRecord {
            trial: 0,
            coherence: 0.128,
            choice: Action::Right,
            correct: true,
            rt_steps: 10,
            terminal_state: State(terminal),
            terminal_value: terminal as f64,
            reward: 20.0,
            timed_out,
        }
    }

    #[test]
    fn constant_terminal_states() {
        let rs: Vec<_> = (0..10).map(|_| rec(20, false)).collect();
        let e = empirical_terminal_state(&rs, 10).unwrap();
        assert_eq!((e.b_mean, e.b_std), (20.0, 0.0));
    }

    #[test]
    fn alternating_signs_use_absolute_value() {
        let rs: Vec<_> = (0..10).map(|i| rec(if i % 2 == 0 { 20 } else { -20 }, false)).collect();
        assert_eq!(empirical_terminal_state(&rs, 6).unwrap().b_mean, 20.0);
    }

    #[test]
    fn window_trails_and_skips_timeouts() {
        let mut rs: Vec<_> = (0..5).map(|_| rec(2, false)).collect();
        rs.extend((0..5).map(|_| rec(8, false)));
        rs.push(rec(100, true));
        let e = empirical_terminal_state(&rs, 6).unwrap();
        assert_eq!(e.b_mean, 8.0);
        assert_eq!(e.n, 5);
    }

    #[test]
    fn all_timed_out_is_unavailable() {
        let rs: Vec<_> = (0..4).map(|_| rec(3, true)).collect();
        assert_eq!(empirical_terminal_state(&rs, 4), Err(EstimateUnavailable));
    }

    #[test]
    fn zero_table_has_no_peaks() {
        let q = QTable::<f64>::zeros(StateSpace::new(30.0, 1.0).unwrap());
        assert_eq!(qtable_terminal_states(&q), (None, None));
    }

    #[test]
    fn single_right_bump() {
        let mut q = QTable::<f64>::zeros(StateSpace::new(30.0, 1.0).unwrap());
        for s in 1..30 {
            q.set(State(s), Action::Wait, -1.0);
            q.set(State(s), Action::Left, -5.0);
            q.set(State(s), Action::Right, -3.0);
        }
        for (s, v) in [(13, -0.5), (14, 1.0), (15, 4.0), (16, 2.0)] {
            q.set(State(s), Action::Right, v);
        }
        assert_eq!(qtable_terminal_states(&q), (None, Some(State(15))));
    }
}

use serde::{Deserialize, Serialize};

use super::stats;
use super::weibull::{weibull_fit, FitOutcome};
use crate::agent::{Action, TrialRecord};
use crate::scalar::Scalar;

/// Accuracy and chronometry at one |coherence|.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsychometricRow {
    pub coherence: f64,
    pub n_trials: usize,
    pub accuracy: f64,
    pub accuracy_sem: f64,
    pub mean_rt_ms: f64,
    pub rt_sem: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PsychometricSummary {
    pub rows: Vec<PsychometricRow>,
}

impl PsychometricSummary {
    pub fn total_trials(&self) -> usize {
        self.rows.iter().map(|r| r.n_trials).sum()
    }

    pub fn row(&self, coherence: f64) -> Option<&PsychometricRow> {
        self.rows.iter().find(|r| (r.coherence - coherence).abs() < 1e-12)
    }
}

fn group_by<T: Scalar, K: Fn(T) -> f64>(records: &[TrialRecord<T>], key: K) -> Vec<(f64, Vec<&TrialRecord<T>>)> {
    let mut groups: Vec<(f64, Vec<&TrialRecord<T>>)> = Vec::new();
    for r in records {
        let k = key(r.coherence);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, v)) => v.push(r),
            None => groups.push((k, vec![r])),
        }
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    groups
}

/// Accuracy and mean RT per |coherence|. Timed-out trials are included
/// with their forced choice.
pub fn psychometric_summary<T: Scalar>(records: &[TrialRecord<T>], dt_ms: T) -> PsychometricSummary {
    let rows = group_by(records, |c| c.abs().as_f64())
        .into_iter()
        .map(|(c, rs)| {
            let acc: Vec<f64> = rs.iter().map(|r| if r.correct { 1.0 } else { 0.0 }).collect();
            let rt: Vec<f64> = rs.iter().map(|r| r.rt_ms(dt_ms).as_f64()).collect();
            PsychometricRow {
                coherence: c,
                n_trials: rs.len(),
                accuracy: stats::mean(&acc),
                accuracy_sem: stats::sem(&acc),
                mean_rt_ms: stats::mean(&rt),
                rt_sem: stats::sem(&rt),
            }
        })
        .collect();
    PsychometricSummary { rows }
}

/// Choice probability and RT per signed coherence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedRow {
    pub coherence: f64,
    pub n_trials: usize,
    pub p_right: f64,
    pub p_right_sem: f64,
    pub mean_rt_ms: f64,
    pub rt_sem: f64,
}

pub fn signed_summary<T: Scalar>(records: &[TrialRecord<T>], dt_ms: T) -> Vec<SignedRow> {
    group_by(records, |c| c.as_f64())
        .into_iter()
        .map(|(c, rs)| {
            let right: Vec<f64> = rs.iter().map(|r| if r.choice == Action::Right { 1.0 } else { 0.0 }).collect();
            let rt: Vec<f64> = rs.iter().map(|r| r.rt_ms(dt_ms).as_f64()).collect();
            SignedRow {
                coherence: c,
                n_trials: rs.len(),
                p_right: stats::mean(&right),
                p_right_sem: stats::sem(&right),
                mean_rt_ms: stats::mean(&rt),
                rt_sem: stats::sem(&rt),
            }
        })
        .collect()
}

/// Per-bin behavioral summary along a learning run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningBin {
    pub start: usize,
    pub end: usize,
    pub accuracy: f64,
    pub mean_rt_ms: f64,
    /// 82%-correct threshold; `None` when the fit failed or never reaches 82%.
    pub threshold: Option<f64>,
    pub lapse: Option<f64>,
}

/// Consecutive bins of `bin` trials (a shorter tail bin is dropped).
pub fn learning_curves<T: Scalar>(records: &[TrialRecord<T>], bin: usize, dt_ms: T) -> Vec<LearningBin> {
    let bin = bin.max(1);
    records
        .chunks(bin)
        .enumerate()
        .filter(|(_, ch)| ch.len() == bin)
        .map(|(i, ch)| {
            let summary = psychometric_summary(ch, dt_ms);
            let acc: Vec<f64> = ch.iter().map(|r| if r.correct { 1.0 } else { 0.0 }).collect();
            let rt: Vec<f64> = ch.iter().map(|r| r.rt_ms(dt_ms).as_f64()).collect();
            let (threshold, lapse) = match weibull_fit(&summary) {
                FitOutcome::Fitted(f) => (f.threshold82, Some(f.lapse)),
                FitOutcome::Failed { .. } => (None, None),
            };
            LearningBin {
                start: i * bin,
                end: (i + 1) * bin,
                accuracy: stats::mean(&acc),
                mean_rt_ms: stats::mean(&rt),
                threshold,
                lapse,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::State;
    use crate::analysis::closed_form::{accuracy_closed_form, rt_closed_form};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rec(c: f64, correct: bool, rt: usize) -> TrialRecord<f64> {
        TrialRecord {
            trial: 0,
            coherence: c,
            choice: if (c >= 0.0) == correct { Action::Right } else { Action::Left },
            correct,
            rt_steps: rt,
            terminal_state: State(0),
            terminal_value: 0.0,
            reward: 0.0,
            timed_out: false,
        }
    }

    #[test]
    fn single_correct_trial() {
        let s = psychometric_summary(&[rec(0.128, true, 40)], 1.0);
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.rows[0].accuracy, 1.0);
        assert_eq!(s.rows[0].accuracy_sem, 0.0);
        assert_eq!(s.rows[0].mean_rt_ms, 40.0);
    }

    #[test]
    fn folds_signs_and_conserves_counts() {
        let rs = vec![rec(0.064, true, 1), rec(-0.064, false, 2), rec(0.0, true, 3), rec(0.512, true, 4)];
        let s = psychometric_summary(&rs, 1.0);
        assert_eq!(s.rows.iter().map(|r| r.coherence).collect::<Vec<_>>(), vec![0.0, 0.064, 0.512]);
        assert_eq!(s.total_trials(), rs.len());
        assert_eq!(s.row(0.064).unwrap().accuracy, 0.5);
    }

    #[test]
    fn self_consistent_with_generating_curves() {
        // Outcomes drawn from the closed-form accuracy; RTs from an
        // exponential with the closed-form mean.
        let (b, k) = (20.0, 0.4);
        let levels = [0.032, 0.064, 0.128, 0.256, 0.512];
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut rs = Vec::new();
        for _ in 0..800 {
            for &c in &levels {
                let correct = rng.random::<f64>() < accuracy_closed_form(c, b, k);
                let mean_rt = rt_closed_form(c, b, k);
                let rt = (-mean_rt * (1.0 - rng.random::<f64>()).ln()).round() as usize;
                rs.push(rec(c, correct, rt));
            }
        }
        let s = psychometric_summary(&rs, 1.0);
        for row in &s.rows {
            let acc = accuracy_closed_form(row.coherence, b, k);
            let rt = rt_closed_form(row.coherence, b, k);
            assert!((row.accuracy - acc).abs() < 2.0 * row.accuracy_sem.max(1e-3), "{row:?}");
            assert!((row.mean_rt_ms - rt).abs() < 2.0 * row.rt_sem + 0.5, "{row:?}");
        }
    }

    #[test]
    fn signed_rows_report_right_choices() {
        let rs = vec![rec(0.0, true, 1), rec(0.0, false, 1), rec(-0.1, true, 1)];
        let s = signed_summary(&rs, 1.0);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].coherence, -0.1);
        assert_eq!(s[0].p_right, 0.0);
        assert_eq!(s[1].p_right, 0.5);
    }
}

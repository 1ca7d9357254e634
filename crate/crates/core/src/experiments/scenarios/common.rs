use serde::Serialize;

use crate::agent::TrialRecord;
use crate::analysis::stats;
use crate::analysis::{empirical_terminal_state, psychometric_summary, PsychometricSummary};
use crate::experiments::replicate::Aggregate;
use crate::experiments::runner::{Condition, RunData, RunRecord};

/// Behavior over the trailing `window` trials of one session.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunMetrics {
    /// Mean |terminal state| (NaN if every trial timed out).
    pub terminal_state: f64,
    pub accuracy: f64,
    pub mean_rt_ms: f64,
}

pub fn run_metrics(records: &[TrialRecord<f64>], window: usize, dt_ms: f64) -> RunMetrics {
    let start = records.len().saturating_sub(window);
    let tail = &records[start..];
    let acc: Vec<f64> = tail.iter().map(|r| f64::from(u8::from(r.correct))).collect();
    let rt: Vec<f64> = tail.iter().map(|r| r.rt_ms(dt_ms)).collect();
    RunMetrics {
        terminal_state: empirical_terminal_state(tail, tail.len()).map(|e| e.b_mean).unwrap_or(f64::NAN),
        accuracy: stats::mean(&acc),
        mean_rt_ms: stats::mean(&rt),
    }
}

/// Replication aggregate of [`RunMetrics`] for one condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionMetrics {
    pub label: String,
    pub sweep_param: Option<String>,
    pub sweep_value: Option<f64>,
    pub terminal_state: Aggregate,
    pub accuracy: Aggregate,
    pub mean_rt_ms: Aggregate,
}

/// Metrics over the trailing window of each condition's last phase.
pub fn condition_metrics(conds: &[Condition], data: &RunData) -> Vec<ConditionMetrics> {
    conds
        .iter()
        .map(|c| {
            let last = c.phases.last().map(|p| p.name.clone()).unwrap_or_default();
            let range = c.phase_range(&last).unwrap_or(0..0);
            let window = c.config.run.trailing_window as usize;
            let dt = c.config.evidence.dt_ms;
            let m: Vec<RunMetrics> = data.condition(&c.label).map(|r| run_metrics(r.slice(range.clone()), window, dt)).collect();
            let col = |f: fn(&RunMetrics) -> f64| m.iter().map(f).collect::<Vec<f64>>();
            ConditionMetrics {
                label: c.label.clone(),
                sweep_param: c.sweep.as_ref().map(|s| s.0.clone()),
                sweep_value: c.sweep.as_ref().map(|s| s.1),
                terminal_state: Aggregate::of_finite(&col(|m| m.terminal_state)),
                accuracy: Aggregate::of_finite(&col(|m| m.accuracy)),
                mean_rt_ms: Aggregate::of_finite(&col(|m| m.mean_rt_ms)),
            }
        })
        .collect()
}

pub fn find<'a>(conds: &'a [Condition], label: &str) -> &'a Condition {
    conds.iter().find(|c| c.label == label).expect("condition planned by the same scenario")
}

/// Records of `phase` for every replication of `label`, concatenated.
pub fn pooled(conds: &[Condition], data: &RunData, label: &str, phase: &str) -> Vec<TrialRecord<f64>> {
    let range = find(conds, label).phase_range(phase).unwrap_or(0..0);
    data.condition(label).flat_map(|r| r.slice(range.clone()).iter().cloned()).collect()
}

/// Per-replication slices of `phase` for `label`.
pub fn per_rep<'a>(conds: &[Condition], data: &'a RunData, label: &'a str, phase: &str) -> Vec<&'a [TrialRecord<f64>]> {
    let range = find(conds, label).phase_range(phase).unwrap_or(0..0);
    data.condition(label).map(|r: &RunRecord| r.slice(range.clone())).collect()
}

pub fn pooled_psychometrics(conds: &[Condition], data: &RunData, label: &str, phase: &str) -> PsychometricSummary {
    psychometric_summary(&pooled(conds, data, label, phase), find(conds, label).config.evidence.dt_ms)
}

pub fn rts(records: &[TrialRecord<f64>], dt_ms: f64) -> Vec<f64> {
    records.iter().map(|r| r.rt_ms(dt_ms)).collect()
}

pub fn correct(records: &[TrialRecord<f64>]) -> Vec<f64> {
    records.iter().map(|r| f64::from(u8::from(r.correct))).collect()
}

pub fn abs_terminal(records: &[TrialRecord<f64>]) -> Vec<f64> {
    records.iter().filter(|r| !r.timed_out).map(|r| r.terminal_value.abs()).collect()
}

/// Records whose |coherence| equals `c`.
pub fn at_strength(records: &[TrialRecord<f64>], c: f64) -> Vec<TrialRecord<f64>> {
    records.iter().filter(|r| (r.coherence.abs() - c).abs() < 1e-12).cloned().collect()
}

/// Distinct |coherence| values present, ascending.
pub fn strengths(records: &[TrialRecord<f64>]) -> Vec<f64> {
    let mut v: Vec<f64> = records.iter().map(|r| r.coherence.abs()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Two-group comparison of means (Welch) with both group summaries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

impl Comparison {
    pub fn welch(a: &[f64], b: &[f64]) -> Self {
        let t = stats::welch_t(a, b);
        Self { mean_a: stats::mean(a), mean_b: stats::mean(b), n_a: a.len(), n_b: b.len(), t: t.t, df: t.df, p: t.p }
    }

    /// Pooled two-proportion z test on 0/1 outcomes (`df` is reported as infinite).
    pub fn proportions(a: &[f64], b: &[f64]) -> Self {
        let k = |x: &[f64]| x.iter().filter(|&&v| v > 0.5).count();
        let (z, p) = stats::two_proportion_z(k(a), a.len(), k(b), b.len());
        Self { mean_a: stats::mean(a), mean_b: stats::mean(b), n_a: a.len(), n_b: b.len(), t: z, df: f64::INFINITY, p }
    }

    pub fn diff(&self) -> f64 {
        self.mean_a - self.mean_b
    }
}

/// Number of adjacent decreases in a sequence.
pub fn adjacent_inversions(xs: &[f64]) -> usize {
    xs.windows(2).filter(|w| w[1] < w[0]).count()
}

/// True when the sequence rises to a strict interior maximum and falls after
/// it, allowing `slack` adjacent violations on each side.
pub fn rises_then_falls(xs: &[f64], slack: usize) -> bool {
    if xs.len() < 3 {
        return false;
    }
    let imax = xs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
    if imax == 0 || imax == xs.len() - 1 {
        return false;
    }
    let up = adjacent_inversions(&xs[..=imax]);
    let down = xs[imax..].windows(2).filter(|w| w[1] > w[0]).count();
    up <= slack && down <= slack
}

/// Indices of strict interior local maxima.
pub fn interior_maxima(xs: &[f64]) -> Vec<usize> {
    (1..xs.len().saturating_sub(1)).filter(|&i| xs[i] > xs[i - 1] && xs[i] > xs[i + 1]).collect()
}

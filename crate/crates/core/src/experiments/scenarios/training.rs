//! Blank-slate learning under the default task: Q-table evolution, the
//! trained model against the bounded-accumulation curves, and behavior over
//! the course of learning.

use serde::Serialize;

use super::common::{abs_terminal, correct, find, per_rep, pooled, rts};
use crate::agent::QTable;
use crate::analysis::stats;
use crate::analysis::{
    accuracy_closed_form, empirical_terminal_state, moving_average, psychometric_summary, qtable_terminal_estimate,
    qtable_terminal_states, rt_closed_form, weibull_fit, FitOutcome,
};
use crate::error::{Error, Result};
use crate::experiments::config::ScenarioConfig;
use crate::experiments::replicate::{mean_series, Aggregate};
use crate::experiments::runner::{Condition, Phase, RunData};

pub fn baseline_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "baseline-training".into(), ..ScenarioConfig::default() };
    c.run.replications = 30;
    c.run.snapshot_trials = vec![0, 400, 1200, 2400];
    c
}

pub fn train_only_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    Ok(vec![Condition::new("train", cfg.clone(), vec![Phase::train(cfg, cfg.run.u_train)?])])
}

/// Signed terminal-state histogram over one block of trials, pooled over
/// replications.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockHistogram {
    pub start: usize,
    pub end: usize,
    pub n: usize,
    pub mean_abs: f64,
    pub std_abs: f64,
    pub centers: Vec<f64>,
    pub fractions: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinAggregate {
    pub start: usize,
    pub end: usize,
    pub value: Aggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SnapshotPeaks {
    pub trial: u64,
    pub left_peak: Option<f64>,
    pub right_peak: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineReport {
    /// Four equal learning blocks.
    pub quarters: Vec<BlockHistogram>,
    /// Mean |terminal state| per bin, aggregated over replications.
    pub terminal_trajectory: Vec<BinAggregate>,
    /// Peaks of the replication-averaged Q-table at each snapshot.
    pub snapshot_peaks: Vec<SnapshotPeaks>,
}

fn histogram(values: &[f64], bin: f64) -> (Vec<f64>, Vec<f64>) {
    let mut counts: std::collections::BTreeMap<i64, usize> = std::collections::BTreeMap::new();
    for v in values {
        *counts.entry((v / bin).round() as i64).or_default() += 1;
    }
    let n = values.len().max(1) as f64;
    counts.into_iter().map(|(k, c)| (k as f64 * bin, c as f64 / n)).unzip()
}

/// Replication-averaged Q-table at each snapshot trial.
pub fn mean_snapshots(cfg: &ScenarioConfig, data: &RunData, label: &str) -> Vec<(u64, QTable<f64>)> {
    let mut out = Vec::new();
    for &t in &cfg.run.snapshot_trials {
        let tables: Vec<QTable<f64>> = data.condition(label).filter_map(|r| r.snapshot(t).cloned()).collect();
        if let Some(m) = QTable::mean_of(&tables) {
            out.push((t, m));
        }
    }
    out
}

pub fn baseline_report(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<(BaselineReport, Vec<(String, QTable<f64>)>)> {
    let reps = per_rep(conds, data, "train", "train");
    let u = cfg.run.u_train as usize;
    let quarter = (u / 4).max(1);
    let quarters = (0..4)
        .map(|i| {
            let (start, end) = (i * quarter, ((i + 1) * quarter).min(u));
            let signed: Vec<f64> = reps
                .iter()
                .flat_map(|r| r[start.min(r.len())..end.min(r.len())].iter())
                .filter(|r| !r.timed_out)
                .map(|r| r.terminal_value)
                .collect();
            let abs: Vec<f64> = signed.iter().map(|v| v.abs()).collect();
            let (centers, fractions) = histogram(&signed, cfg.protocol.histogram_bin);
            BlockHistogram {
                start,
                end,
                n: signed.len(),
                mean_abs: stats::mean(&abs),
                std_abs: stats::std_dev(&abs),
                centers,
                fractions,
            }
        })
        .collect();
    let bin = cfg.run.bin_size as usize;
    let terminal_trajectory = (0..u / bin)
        .map(|i| {
            let per: Vec<f64> = reps.iter().map(|r| stats::mean(&abs_terminal(&r[i * bin..((i + 1) * bin).min(r.len())]))).collect();
            BinAggregate { start: i * bin, end: (i + 1) * bin, value: Aggregate::of_finite(&per) }
        })
        .collect();
    let means = mean_snapshots(cfg, data, "train");
    let space = cfg.state_space()?;
    let snapshot_peaks = means
        .iter()
        .map(|(t, q)| {
            let (l, r) = qtable_terminal_states(q);
            SnapshotPeaks { trial: *t, left_peak: l.map(|s| space.value(s)), right_peak: r.map(|s| space.value(s)) }
        })
        .collect();
    let tables = means.into_iter().map(|(t, q)| (format!("mean_t{t:05}"), q)).collect();
    Ok((BaselineReport { quarters, terminal_trajectory, snapshot_peaks }, tables))
}

pub fn psychometrics_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "trained-psychometrics".into(), ..ScenarioConfig::default() };
    c.run.u_test = 2400;
    c.run.snapshot_trials = vec![2400];
    c
}

pub fn train_test_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    Ok(vec![Condition::new(
        "trained",
        cfg.clone(),
        vec![Phase::train(cfg, cfg.run.u_train)?, Phase::test(cfg, cfg.run.u_test)?],
    )])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictedRow {
    pub coherence: f64,
    pub n_trials: usize,
    pub accuracy: f64,
    pub accuracy_sem: f64,
    pub mean_rt_ms: f64,
    pub rt_sem: f64,
    pub accuracy_closed_form: f64,
    pub rt_closed_form_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsychometricsReport {
    /// Mean |terminal state| over all test trials.
    pub b_mean: f64,
    pub b_std: f64,
    pub b_per_rep: Vec<f64>,
    /// Q-table peak estimate of the trained table, averaged over replications.
    pub qtable_peak: Option<f64>,
    pub timed_out: usize,
    pub rows: Vec<PredictedRow>,
    pub weibull: FitOutcome,
}

pub fn psychometrics_report(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<PsychometricsReport> {
    if cfg.run.u_test == 0 {
        return Err(Error::config("run.u_test", "the trained-model summary needs test trials"));
    }
    let dt = cfg.evidence.dt_ms;
    let test = pooled(conds, data, "trained", "test");
    let est = empirical_terminal_state(&test, test.len()).map_err(|e| Error::Internal(e.to_string()))?;
    let b_per_rep = per_rep(conds, data, "trained", "test")
        .iter()
        .map(|r| empirical_terminal_state(r, r.len()).map(|e| e.b_mean).unwrap_or(f64::NAN))
        .collect();
    let peaks: Vec<f64> = data
        .condition("trained")
        .filter_map(|r| r.snapshot(cfg.run.u_train))
        .filter_map(|q| qtable_terminal_estimate(q).map(|e| e.b_mean))
        .collect();
    let summary = psychometric_summary(&test, dt);
    let k = cfg.evidence.k;
    let rows = summary
        .rows
        .iter()
        .map(|r| PredictedRow {
            coherence: r.coherence,
            n_trials: r.n_trials,
            accuracy: r.accuracy,
            accuracy_sem: r.accuracy_sem,
            mean_rt_ms: r.mean_rt_ms,
            rt_sem: r.rt_sem,
            accuracy_closed_form: accuracy_closed_form(r.coherence, est.b_mean, k),
            rt_closed_form_ms: rt_closed_form(r.coherence, est.b_mean, k) * dt,
        })
        .collect();
    Ok(PsychometricsReport {
        b_mean: est.b_mean,
        b_std: est.b_std,
        b_per_rep,
        qtable_peak: (!peaks.is_empty()).then(|| stats::mean(&peaks)),
        timed_out: test.iter().filter(|r| r.timed_out).count(),
        rows,
        weibull: weibull_fit(&summary),
    })
}

pub fn learning_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "learning-dynamics".into(), ..ScenarioConfig::default() };
    c.run.replications = 30;
    c
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearningBinStat {
    pub start: usize,
    pub end: usize,
    pub accuracy: Aggregate,
    pub mean_rt_ms: Aggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuartileFit {
    pub start: usize,
    pub end: usize,
    pub threshold: Option<f64>,
    /// Fitted Weibull lapse.
    pub lapse_fit: Option<f64>,
    /// Error rate at the highest coherence.
    pub lapse_empirical: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairedComparison {
    pub mean_a: f64,
    pub mean_b: f64,
    pub n: usize,
    pub t: f64,
    pub p: f64,
}

impl PairedComparison {
    pub fn of(a: &[f64], b: &[f64]) -> Self {
        let t = stats::paired_t(a, b);
        Self { mean_a: stats::mean(a), mean_b: stats::mean(b), n: a.len().min(b.len()), t: t.t, p: t.p }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearningReport {
    pub bins: Vec<LearningBinStat>,
    /// Replication mean of each run's centered moving average.
    pub smoothed_accuracy: Vec<f64>,
    pub smoothed_rt_ms: Vec<f64>,
    pub quartiles: Vec<QuartileFit>,
    /// First-bin vs last-bin mean RT, paired over replications.
    pub first_vs_last_rt: PairedComparison,
    pub threshold_spearman: f64,
    pub lapse_spearman: f64,
}

pub fn learning_report(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<LearningReport> {
    let label = conds.first().map(|c| c.label.clone()).unwrap_or_default();
    let dt = cfg.evidence.dt_ms;
    let reps = per_rep(conds, data, &label, &find(conds, &label).phases[0].name);
    let u = reps.iter().map(|r| r.len()).min().unwrap_or(0);
    let bin = cfg.run.bin_size as usize;
    let bins: Vec<LearningBinStat> = (0..u / bin)
        .map(|i| {
            let (s, e) = (i * bin, (i + 1) * bin);
            let acc: Vec<f64> = reps.iter().map(|r| stats::mean(&correct(&r[s..e]))).collect();
            let rt: Vec<f64> = reps.iter().map(|r| stats::mean(&rts(&r[s..e], dt))).collect();
            LearningBinStat { start: s, end: e, accuracy: Aggregate::of(&acc), mean_rt_ms: Aggregate::of(&rt) }
        })
        .collect();
    let w = cfg.run.smooth_window as usize;
    let smoothed_accuracy = mean_series(&reps.iter().map(|r| moving_average(&correct(&r[..u]), w)).collect::<Vec<_>>());
    let smoothed_rt_ms = mean_series(&reps.iter().map(|r| moving_average(&rts(&r[..u], dt), w)).collect::<Vec<_>>());
    let q = (u / 4).max(1);
    let quartiles: Vec<QuartileFit> = (0..4)
        .map(|i| {
            let (s, e) = (i * q, ((i + 1) * q).min(u));
            let block: Vec<_> = reps.iter().flat_map(|r| r[s..e].iter().cloned()).collect();
            let summary = psychometric_summary(&block, dt);
            let fit = weibull_fit(&summary);
            let top = summary.rows.last().map(|r| 1.0 - r.accuracy).unwrap_or(f64::NAN);
            let (threshold, lapse_fit) = match fit {
                FitOutcome::Fitted(f) => (f.threshold82, Some(f.lapse)),
                FitOutcome::Failed { .. } => (None, None),
            };
            QuartileFit { start: s, end: e, threshold, lapse_fit, lapse_empirical: top }
        })
        .collect();
    let first_last = match (bins.first(), bins.last()) {
        (Some(f), Some(l)) => {
            let a: Vec<f64> = reps.iter().map(|r| stats::mean(&rts(&r[f.start..f.end], dt))).collect();
            let b: Vec<f64> = reps.iter().map(|r| stats::mean(&rts(&r[l.start..l.end], dt))).collect();
            PairedComparison::of(&a, &b)
        }
        _ => PairedComparison { mean_a: f64::NAN, mean_b: f64::NAN, n: 0, t: 0.0, p: 1.0 },
    };
    let spearman_of = |vals: Vec<(f64, f64)>| {
        if vals.len() < 2 {
            return f64::NAN;
        }
        let (x, y): (Vec<f64>, Vec<f64>) = vals.into_iter().unzip();
        stats::spearman(&x, &y)
    };
    let threshold_spearman =
        spearman_of(quartiles.iter().enumerate().filter_map(|(i, q)| q.threshold.map(|t| (i as f64, t))).collect());
    let lapse_spearman = spearman_of(quartiles.iter().enumerate().map(|(i, q)| (i as f64, q.lapse_empirical)).collect());
    Ok(LearningReport {
        bins,
        smoothed_accuracy,
        smoothed_rt_ms,
        quartiles,
        first_vs_last_rt: first_last,
        threshold_spearman,
        lapse_spearman,
    })
}

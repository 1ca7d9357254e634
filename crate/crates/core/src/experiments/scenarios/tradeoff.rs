//! Speed-accuracy trade-off under changes of the payoff regime.

use serde::Serialize;

use super::common::{
    adjacent_inversions, at_strength, condition_metrics, correct, interior_maxima, per_rep, pooled, rts, strengths,
    Comparison,
};
use super::training::train_only_plan;
use crate::analysis::stats;
use crate::error::{Error, Result};
use crate::experiments::config::ScenarioConfig;
use crate::experiments::replicate::Aggregate;
use crate::experiments::runner::{Condition, Phase, RunData};

pub fn cbr_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "sat-cbr".into(), ..ScenarioConfig::default() };
    c.run.u_train = 900;
    c.run.replications = 30;
    c
}

pub fn cbr_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    cfg.protocol
        .cbr_values
        .iter()
        .map(|&v| {
            let c = cfg.set_number("rewards.cbr", v)?;
            Ok(Condition::new(format!("cbr={v}"), c.clone(), vec![Phase::train(&c, c.run.u_train)?]).swept("cbr", v))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CbrPoint {
    pub cbr: f64,
    pub r_wrong: f64,
    pub terminal_state: Aggregate,
    pub accuracy: Aggregate,
    pub mean_rt_ms: Aggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CbrReport {
    pub points: Vec<CbrPoint>,
    /// Last point at the lowest mean terminal state. Points before it sit on
    /// the lower plateau where the agent never waits.
    pub trend_start: usize,
    /// First point at the highest mean terminal state; later points form the
    /// saturation plateau.
    pub trend_end: usize,
    pub terminal_inversions: usize,
    pub rt_inversions: usize,
    pub accuracy_inversions: usize,
}

pub fn cbr_report(conds: &[Condition], data: &RunData) -> Result<CbrReport> {
    let metrics = condition_metrics(conds, data);
    let points: Vec<CbrPoint> = conds
        .iter()
        .zip(metrics)
        .map(|(c, m)| CbrPoint {
            cbr: c.sweep.as_ref().map(|s| s.1).unwrap_or(f64::NAN),
            r_wrong: c.config.rewards.r_wrong,
            terminal_state: m.terminal_state,
            accuracy: m.accuracy,
            mean_rt_ms: m.mean_rt_ms,
        })
        .collect();
    let b: Vec<f64> = points.iter().map(|p| p.terminal_state.mean).collect();
    let lo = b.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let trend_start = b.iter().rposition(|&x| x == lo).unwrap_or(0);
    let trend_end = b.iter().position(|&x| x == hi).unwrap_or(0).max(trend_start);
    let upto = |f: fn(&CbrPoint) -> f64| {
        let seg: Vec<f64> = points.get(trend_start..=trend_end).unwrap_or(&[]).iter().map(f).collect();
        adjacent_inversions(&seg)
    };
    Ok(CbrReport {
        trend_start,
        trend_end,
        terminal_inversions: upto(|p| p.terminal_state.mean),
        rt_inversions: upto(|p| p.mean_rt_ms.mean),
        accuracy_inversions: upto(|p| p.accuracy.mean),
        points,
    })
}

pub fn waitcost_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "sat-waitcost".into(), ..ScenarioConfig::default() };
    c.run.u_train = 1200;
    c.run.u_test = 1200;
    c.run.replications = 30;
    c
}

pub fn waitcost_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    if cfg.protocol.wait_costs.len() != 2 {
        return Err(Error::config("protocol.wait_costs", "needs exactly two wait costs"));
    }
    cfg.protocol
        .wait_costs
        .iter()
        .map(|&w| {
            let c = cfg.set_number("rewards.r_wait", w)?;
            let mut phases = vec![Phase::train(&c, c.run.u_train)?];
            if c.run.u_test > 0 {
                phases.push(Phase::test(&c, c.run.u_test)?);
            }
            Ok(Condition::new(format!("r_wait={w}"), c, phases).swept("rewards.r_wait", w))
        })
        .collect()
}

/// First wait cost (a) against the second (b) at one |coherence|.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelComparison {
    pub coherence: f64,
    pub accuracy: Comparison,
    pub rt_ms: Comparison,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaitCostReport {
    pub wait_costs: Vec<f64>,
    pub levels: Vec<LevelComparison>,
}

fn analysis_phase(c: &Condition) -> String {
    c.phases.last().map(|p| p.name.clone()).unwrap_or_default()
}

/// Per-|c| comparisons between the first two conditions, pooled over
/// replications.
pub fn compare_levels(conds: &[Condition], data: &RunData) -> Vec<LevelComparison> {
    let (a, b) = (&conds[0], &conds[1]);
    let ra = pooled(conds, data, &a.label, &analysis_phase(a));
    let rb = pooled(conds, data, &b.label, &analysis_phase(b));
    let dt = a.config.evidence.dt_ms;
    strengths(&ra)
        .into_iter()
        .filter(|&c| c > 0.0)
        .map(|c| {
            let (xa, xb) = (at_strength(&ra, c), at_strength(&rb, c));
            LevelComparison {
                coherence: c,
                accuracy: Comparison::proportions(&correct(&xa), &correct(&xb)),
                rt_ms: Comparison::welch(&rts(&xa, dt), &rts(&xb, dt)),
            }
        })
        .collect()
}

pub fn waitcost_report(conds: &[Condition], data: &RunData) -> Result<WaitCostReport> {
    Ok(WaitCostReport {
        wait_costs: conds.iter().map(|c| c.config.rewards.r_wait).collect(),
        levels: compare_levels(conds, data),
    })
}

pub fn timed_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "timed-waitcost".into(), ..ScenarioConfig::default() };
    c.agent.wait_schedule = "sigmoid".into();
    // Twice the sigmoid midpoint, so the run spans the whole cost transition.
    c.run.u_train = 1200;
    c.run.replications = 50;
    c
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuarterStat {
    pub start: usize,
    pub end: usize,
    pub accuracy: Aggregate,
    pub mean_rt_ms: Aggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimedReport {
    /// Replication-mean RT per bin.
    pub binned_rt_ms: Vec<f64>,
    pub peak_bin: usize,
    /// Bins that are strict local maxima of `binned_rt_ms`.
    pub interior_maxima: Vec<usize>,
    /// Exactly one interior local maximum, and it is the global one.
    pub single_interior_maximum: bool,
    pub quarters: Vec<QuarterStat>,
    /// Quarter with the longest mean RT.
    pub peak_quarter: usize,
}

pub fn timed_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    train_only_plan(cfg)
}

pub fn timed_report(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<TimedReport> {
    let dt = cfg.evidence.dt_ms;
    let reps = per_rep(conds, data, "train", "train");
    let u = reps.iter().map(|r| r.len()).min().unwrap_or(0);
    let bin = cfg.run.bin_size as usize;
    let binned_rt_ms: Vec<f64> = (0..u / bin)
        .map(|i| stats::mean(&reps.iter().map(|r| stats::mean(&rts(&r[i * bin..(i + 1) * bin], dt))).collect::<Vec<_>>()))
        .collect();
    let peak_bin = binned_rt_ms.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
    let q = (u / 4).max(1);
    let quarters: Vec<QuarterStat> = (0..4)
        .map(|i| {
            let (s, e) = (i * q, ((i + 1) * q).min(u));
            QuarterStat {
                start: s,
                end: e,
                accuracy: Aggregate::of(&reps.iter().map(|r| stats::mean(&correct(&r[s..e]))).collect::<Vec<_>>()),
                mean_rt_ms: Aggregate::of(&reps.iter().map(|r| stats::mean(&rts(&r[s..e], dt))).collect::<Vec<_>>()),
            }
        })
        .collect();
    let peak_quarter = quarters
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.mean_rt_ms.mean.total_cmp(&b.1.mean_rt_ms.mean))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let interior_maxima = interior_maxima(&binned_rt_ms);
    Ok(TimedReport {
        single_interior_maximum: interior_maxima == [peak_bin],
        interior_maxima,
        binned_rt_ms,
        peak_bin,
        quarters,
        peak_quarter,
    })
}

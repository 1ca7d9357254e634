//! The deterministic toy limit, observational warm-up and single-parameter
//! sensitivity sweeps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::common::{condition_metrics, correct, per_rep, rts, ConditionMetrics};
use super::training::{train_only_plan, PairedComparison};
use crate::agent::{observational_warmup, QTable, State};
use crate::analysis::stats;
use crate::error::{Error, Result};
use crate::experiments::config::ScenarioConfig;
use crate::experiments::replicate::{replicate, Aggregate};
use crate::experiments::runner::{Condition, Init, Phase, RunData};
use crate::experiments::toy::{check_toy_session, ensure_toy, ToyReport};
use crate::rng::{derive_seed, replication_seed};

pub fn toy_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "toy-oracle".into(), ..ScenarioConfig::default() };
    c.evidence.sigma = 0.0;
    c.evidence.k = 1.0;
    c.agent.epsilon = 1.0;
    c.agent.gamma = 0.0;
    c.agent.beta = f64::INFINITY;
    c.space.m = 10.0;
    c.task.coherences = vec![-1.0, 1.0];
    c.run.u_train = 40;
    c.run.replications = 8;
    c
}

pub fn toy_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    ensure_toy(cfg)?;
    train_only_plan(cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToySummary {
    pub sessions: Vec<ToyReport>,
    pub all_passed: bool,
}

/// Replays every replication seed against the lookup-table oracle.
pub fn toy_report(cfg: &ScenarioConfig) -> Result<ToySummary> {
    let sessions = (0..cfg.run.replications)
        .map(|rep| check_toy_session(cfg, replication_seed(cfg.run.base_seed, rep)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ToySummary { all_passed: sessions.iter().all(|s| s.passed), sessions })
}

pub fn warmup_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "observational-warmup".into(), ..ScenarioConfig::default() };
    c.rewards.r_correct = 100.0;
    c.run.u_train = 400;
    c.run.replications = 50;
    c
}

pub fn warmup_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    let phases = vec![Phase::train(cfg, cfg.run.u_train)?];
    Ok(vec![
        Condition::new("warmup", cfg.clone(), phases.clone()).with_init(Init::Warmup),
        Condition::new("blank", cfg.clone(), phases),
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarmupBin {
    pub start: usize,
    pub end: usize,
    pub warm_accuracy: Aggregate,
    pub blank_accuracy: Aggregate,
    pub warm_rt_ms: Aggregate,
    pub blank_rt_ms: Aggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarmupReport {
    /// Q-values at state 0 of the replication-averaged post-warm-up table.
    pub q_zero: [f64; 3],
    pub bins: Vec<WarmupBin>,
    /// Warm (a) against blank (b) first-bin RT, paired by seed.
    pub first_bin_rt: PairedComparison,
    /// Regression of the replication-mean warm RT on trial index.
    pub warm_rt_slope: f64,
    pub warm_rt_slope_p: f64,
    /// Bins where warm accuracy falls below blank by more than the
    /// combined SEM.
    pub accuracy_shortfalls: Vec<usize>,
}

const TAG_WARMUP_MEAN: u64 = 0x7161_7667;

/// Mean post-warm-up table over `warmup.q_replications` demonstrations.
pub fn mean_warmup_table(cfg: &ScenarioConfig) -> Result<QTable<f64>> {
    let params = cfg.agent_params()?;
    let space = cfg.state_space()?;
    let evidence = cfg.evidence_params()?;
    let spec = cfg.warmup_spec()?;
    let tables = replicate(cfg.warmup.q_replications.max(1), |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.run.base_seed, &[TAG_WARMUP_MEAN, i]));
        observational_warmup(&spec, &params, space, &evidence, &mut rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    QTable::mean_of(&tables).ok_or_else(|| Error::Internal("no warm-up tables".into()))
}

pub fn warmup_report(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<(WarmupReport, Vec<(String, QTable<f64>)>)> {
    let dt = cfg.evidence.dt_ms;
    let warm = per_rep(conds, data, "warmup", "train");
    let blank = per_rep(conds, data, "blank", "train");
    let u = warm.iter().chain(&blank).map(|r| r.len()).min().unwrap_or(0);
    let bin = cfg.run.bin_size as usize;
    let per = |runs: &[&[crate::agent::TrialRecord<f64>]], s: usize, e: usize, rt: bool| -> Vec<f64> {
        runs.iter().map(|r| if rt { stats::mean(&rts(&r[s..e], dt)) } else { stats::mean(&correct(&r[s..e])) }).collect()
    };
    let bins: Vec<WarmupBin> = (0..u / bin)
        .map(|i| {
            let (s, e) = (i * bin, (i + 1) * bin);
            WarmupBin {
                start: s,
                end: e,
                warm_accuracy: Aggregate::of(&per(&warm, s, e, false)),
                blank_accuracy: Aggregate::of(&per(&blank, s, e, false)),
                warm_rt_ms: Aggregate::of(&per(&warm, s, e, true)),
                blank_rt_ms: Aggregate::of(&per(&blank, s, e, true)),
            }
        })
        .collect();
    let first_bin_rt = PairedComparison::of(&per(&warm, 0, bin.min(u), true), &per(&blank, 0, bin.min(u), true));
    let xs: Vec<f64> = (0..u).map(|i| i as f64).collect();
    let ys: Vec<f64> = (0..u).map(|i| stats::mean(&per(&warm, i, i + 1, true))).collect();
    let fit = stats::linear_regression(&xs, &ys);
    let accuracy_shortfalls = bins
        .iter()
        .enumerate()
        .filter(|(_, b)| {
            let tol = (b.warm_accuracy.sem.powi(2) + b.blank_accuracy.sem.powi(2)).sqrt();
            b.warm_accuracy.mean < b.blank_accuracy.mean - tol
        })
        .map(|(i, _)| i)
        .collect();
    let mean_table = mean_warmup_table(cfg)?;
    Ok((
        WarmupReport {
            q_zero: mean_table.row(State(0)),
            bins,
            first_bin_rt,
            warm_rt_slope: fit.slope,
            warm_rt_slope_p: fit.p,
            accuracy_shortfalls,
        },
        vec![("warmup_mean".into(), mean_table)],
    ))
}

pub fn sensitivity_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "param-sensitivity".into(), ..ScenarioConfig::default() };
    c.run.u_train = 900;
    c.run.trailing_window = 100;
    c.run.replications = 30;
    c
}

/// Config path swept by each sensitivity list.
pub fn sensitivity_lists(cfg: &ScenarioConfig) -> Vec<(&'static str, Vec<f64>)> {
    let p = &cfg.protocol;
    vec![
        ("agent.beta", p.sens_beta.clone()),
        ("agent.epsilon", p.sens_epsilon.clone()),
        ("agent.gamma", p.sens_gamma.clone()),
        ("rewards.r_correct", p.sens_r_correct.clone()),
        ("rewards.r_wrong", p.sens_r_wrong.clone()),
        ("rewards.r_wait", p.sens_r_wait.clone()),
        ("space.m", p.sens_m.clone()),
        ("run.u_train", p.sens_u.clone()),
    ]
}

pub fn sensitivity_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    let mut out = Vec::new();
    for (path, values) in sensitivity_lists(cfg) {
        for v in values {
            let c = cfg.set_number(path, v).map_err(|e| match e {
                Error::Config { reason, .. } => Error::config(format!("protocol.sens value for {path}"), reason),
                other => other,
            })?;
            out.push(Condition::new(format!("{path}={v}"), c.clone(), vec![Phase::train(&c, c.run.u_train)?]).swept(path, v));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityCurve {
    pub param: String,
    pub points: Vec<ConditionMetrics>,
}

pub fn sensitivity_report(conds: &[Condition], data: &RunData) -> Result<Vec<SensitivityCurve>> {
    let mut curves: Vec<SensitivityCurve> = Vec::new();
    for m in condition_metrics(conds, data) {
        let param = m.sweep_param.clone().unwrap_or_default();
        match curves.iter_mut().find(|c| c.param == param) {
            Some(c) => c.points.push(m),
            None => curves.push(SensitivityCurve { param, points: vec![m] }),
        }
    }
    Ok(curves)
}

//! Model variants and task manipulations: extrema detection, biased priors,
//! reverse pulses, urgency, post-error urgency and evidence volatility.

use serde::Serialize;

use super::common::{abs_terminal, correct, per_rep, pooled, rts, strengths, Comparison};
use super::tradeoff::{compare_levels, LevelComparison};
use crate::agent::{Action, TrialRecord};
use crate::analysis::{psychometric_summary, signed_summary, stats, PsychometricRow, SignedRow};
use crate::error::{Error, Result};
use crate::experiments::config::{prior_from, ScenarioConfig};
use crate::experiments::replicate::Aggregate;
use crate::experiments::runner::{Condition, Phase, RunData};
use crate::env::{CoherencePrior, StimulusMode, StimulusPlan};

fn train_test(c: &ScenarioConfig) -> Result<Vec<Phase>> {
    Ok(vec![Phase::train(c, c.run.u_train)?, Phase::test(c, c.run.u_test)?])
}

fn require_test(cfg: &ScenarioConfig) -> Result<()> {
    if cfg.run.u_test == 0 {
        return Err(Error::config("run.u_test", "this scenario compares frozen test trials and needs u_test > 0"));
    }
    Ok(())
}

// ---- extrema detection -------------------------------------------------

pub fn extrema_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "extrema-vs-accumulation".into(), ..ScenarioConfig::default() };
    c.run.u_train = 900;
    c.run.u_test = 900;
    c.run.replications = 20;
    c
}

pub fn dynamics_label(dynamics: &str, k: f64) -> String {
    format!("{dynamics}:k={k}")
}

pub fn extrema_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    require_test(cfg)?;
    let mut out = Vec::new();
    for &k in &cfg.protocol.drift_gains {
        for dynamics in ["accumulate", "extrema"] {
            let c = cfg.set("agent.dynamics", toml::Value::String(dynamics.into()))?.set_number("evidence.k", k)?;
            out.push(Condition::new(dynamics_label(dynamics, k), c.clone(), train_test(&c)?).swept("evidence.k", k));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DynamicsResult {
    pub label: String,
    pub dynamics: String,
    pub k: f64,
    pub accuracy: f64,
    pub mean_rt_ms: f64,
    pub timed_out_fraction: f64,
    pub rows: Vec<PsychometricRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremaReport {
    pub max_steps: u64,
    pub results: Vec<DynamicsResult>,
}

impl ExtremaReport {
    pub fn get(&self, dynamics: &str, k: f64) -> Option<&DynamicsResult> {
        self.results.iter().find(|r| r.dynamics == dynamics && r.k == k)
    }
}

pub fn extrema_report(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<ExtremaReport> {
    let results = conds
        .iter()
        .map(|c| {
            let test = pooled(conds, data, &c.label, "test");
            let dt = c.config.evidence.dt_ms;
            DynamicsResult {
                label: c.label.clone(),
                dynamics: c.config.agent.dynamics.clone(),
                k: c.config.evidence.k,
                accuracy: stats::mean(&correct(&test)),
                mean_rt_ms: stats::mean(&rts(&test, dt)),
                timed_out_fraction: test.iter().filter(|r| r.timed_out).count() as f64 / test.len().max(1) as f64,
                rows: psychometric_summary(&test, dt).rows,
            }
        })
        .collect();
    Ok(ExtremaReport { max_steps: cfg.stimulus.max_steps, results })
}

// ---- disproportionate prior --------------------------------------------

pub fn prior_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "prior-8020".into(), ..ScenarioConfig::default() };
    c.run.u_train = 3600;
    c.run.replications = 30;
    c
}

pub fn prior_label(p: f64) -> String {
    format!("p_right={p}")
}

pub fn prior_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    let p = &cfg.protocol;
    if p.discard_trials >= p.biased_trials {
        return Err(Error::config("protocol.discard_trials", "must be smaller than protocol.biased_trials"));
    }
    [p.biased_p_right, 0.5]
        .into_iter()
        .map(|pr| {
            let prior = CoherencePrior::directional(cfg.task.coherences.clone(), pr)
                .map_err(|_| Error::config("protocol.biased_p_right", "must be in [0, 1]"))?;
            let mut block = Phase::train(cfg, p.biased_trials)?;
            block.name = "block".into();
            block.prior = prior;
            let mut balanced = Phase::train(cfg, cfg.run.u_train)?;
            balanced.name = "balanced".into();
            balanced.prior = prior_from(&cfg.task.coherences, &[])?;
            Ok(Condition::new(prior_label(pr), cfg.clone(), vec![balanced, block]).swept("protocol.biased_p_right", pr))
        })
        .collect()
}

/// Mean |terminal state| of trials ending in `side`.
fn side_terminal(records: &[TrialRecord<f64>], side: Action) -> f64 {
    let v: Vec<f64> = records.iter().filter(|r| !r.timed_out && r.choice == side).map(|r| r.terminal_value.abs()).collect();
    stats::mean(&v)
}

/// Mean RT over nonzero levels on one stimulus side, each level weighted
/// equally.
fn side_rt(rows: &[SignedRow], right: bool) -> f64 {
    let v: Vec<f64> =
        rows.iter().filter(|r| r.coherence != 0.0 && (r.coherence > 0.0) == right).map(|r| r.mean_rt_ms).collect();
    stats::mean(&v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SideTrajectory {
    pub start: usize,
    pub end: usize,
    pub frequent: Aggregate,
    pub rare: Aggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriorResult {
    pub label: String,
    pub p_right: f64,
    /// Signed curve over the retained block trials.
    pub signed: Vec<SignedRow>,
    /// Same curve over the discarded opening trials.
    pub signed_discarded: Vec<SignedRow>,
    pub p_right_at_zero: f64,
    pub frequent_rt_ms: f64,
    pub rare_rt_ms: f64,
    /// Per-side terminal state at the end of the balanced phase.
    pub baseline_frequent: Aggregate,
    pub baseline_rare: Aggregate,
    /// Per-side terminal state over the retained block trials.
    pub block_frequent: Aggregate,
    pub block_rare: Aggregate,
    pub frequent_shift: Comparison,
    pub rare_shift: Comparison,
    /// Binned per-side terminal states through the block, discarded part included.
    pub trajectory: Vec<SideTrajectory>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriorReport {
    pub discard_trials: u64,
    pub results: Vec<PriorResult>,
}

pub fn prior_report(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<PriorReport> {
    let dt = cfg.evidence.dt_ms;
    let discard = cfg.protocol.discard_trials as usize;
    let window = cfg.run.trailing_window as usize;
    let bin = cfg.run.bin_size as usize;
    let results = conds
        .iter()
        .map(|c| {
            let p_right = c.sweep.as_ref().map(|s| s.1).unwrap_or(0.5);
            // Rightward is frequent whenever p_right >= 0.5.
            let (freq, rare) = if p_right >= 0.5 { (Action::Right, Action::Left) } else { (Action::Left, Action::Right) };
            let balanced = per_rep(conds, data, &c.label, "balanced");
            let block = per_rep(conds, data, &c.label, "block");
            let retained: Vec<TrialRecord<f64>> = block.iter().flat_map(|r| r[discard.min(r.len())..].iter().cloned()).collect();
            let opening: Vec<TrialRecord<f64>> = block.iter().flat_map(|r| r[..discard.min(r.len())].iter().cloned()).collect();
            let signed = signed_summary(&retained, dt);
            let tail = |r: &[TrialRecord<f64>]| r[r.len().saturating_sub(window)..].to_vec();
            let base_f: Vec<f64> = balanced.iter().map(|r| side_terminal(&tail(r), freq)).collect();
            let base_r: Vec<f64> = balanced.iter().map(|r| side_terminal(&tail(r), rare)).collect();
            let blk_f: Vec<f64> = block.iter().map(|r| side_terminal(&r[discard.min(r.len())..], freq)).collect();
            let blk_r: Vec<f64> = block.iter().map(|r| side_terminal(&r[discard.min(r.len())..], rare)).collect();
            let n = block.iter().map(|r| r.len()).min().unwrap_or(0);
            let trajectory = (0..n / bin)
                .map(|i| {
                    let (s, e) = (i * bin, (i + 1) * bin);
                    SideTrajectory {
                        start: s,
                        end: e,
                        frequent: Aggregate::of_finite(&block.iter().map(|r| side_terminal(&r[s..e], freq)).collect::<Vec<_>>()),
                        rare: Aggregate::of_finite(&block.iter().map(|r| side_terminal(&r[s..e], rare)).collect::<Vec<_>>()),
                    }
                })
                .collect();
            let right_freq = freq == Action::Right;
            PriorResult {
                label: c.label.clone(),
                p_right,
                p_right_at_zero: signed.iter().find(|r| r.coherence == 0.0).map(|r| r.p_right).unwrap_or(f64::NAN),
                frequent_rt_ms: side_rt(&signed, right_freq),
                rare_rt_ms: side_rt(&signed, !right_freq),
                signed_discarded: signed_summary(&opening, dt),
                signed,
                baseline_frequent: Aggregate::of_finite(&base_f),
                baseline_rare: Aggregate::of_finite(&base_r),
                block_frequent: Aggregate::of_finite(&blk_f),
                block_rare: Aggregate::of_finite(&blk_r),
                frequent_shift: Comparison::welch(&blk_f, &base_f),
                rare_shift: Comparison::welch(&blk_r, &base_r),
                trajectory,
            }
        })
        .collect();
    Ok(PriorReport { discard_trials: cfg.protocol.discard_trials, results })
}

// ---- reverse pulse -----------------------------------------------------

pub fn pulse_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "reverse-pulse".into(), ..ScenarioConfig::default() };
    c.run.u_test = 2400;
    c.run.replications = 30;
    c
}

pub fn pulse_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    require_test(cfg)?;
    let s = &cfg.stimulus;
    let pulse = StimulusPlan::new(
        StimulusMode::ReversePulse { onset: s.pulse_onset as usize, half: s.pulse_half as usize },
        s.max_steps as usize,
    )?;
    let test_prior = prior_from(&cfg.protocol.test_coherences, &[])
        .map_err(|e| Error::config("protocol.test_coherences", e.to_string()))?;
    let build = |label: &str, plan: StimulusPlan<f64>| -> Result<Condition> {
        let mut phases = train_test(cfg)?;
        phases[1].prior = test_prior.clone();
        phases[1].plan = plan;
        Ok(Condition::new(label, cfg.clone(), phases))
    };
    Ok(vec![build("no-pulse", cfg.plan())?, build("pulse", pulse)?])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PulseLevel {
    pub coherence: f64,
    /// Trials still undecided at pulse onset, in each condition.
    pub n_exposed: usize,
    /// Pulse minus no-pulse, paired by trial.
    pub rt_ms: Comparison,
    pub rt_paired_p: f64,
    pub accuracy_pulse: f64,
    pub accuracy_no_pulse: f64,
    pub accuracy_diff: f64,
    /// All trials at this level, exposed or not.
    pub rt_all_pulse: f64,
    pub rt_all_no_pulse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PulseReport {
    pub onset: u64,
    pub levels: Vec<PulseLevel>,
}

pub fn pulse_report(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<PulseReport> {
    let dt = cfg.evidence.dt_ms;
    let onset = cfg.stimulus.pulse_onset as usize;
    let plain = pooled(conds, data, "no-pulse", "test");
    let pulsed = pooled(conds, data, "pulse", "test");
    if plain.len() != pulsed.len() {
        return Err(Error::Internal("pulse conditions produced different trial counts".into()));
    }
    let levels = strengths(&plain)
        .into_iter()
        .map(|c| {
            // Sessions share seeds, so trial i is the same stimulus in both arms
            // up to the pulse onset.
            let idx: Vec<usize> = (0..plain.len()).filter(|&i| (plain[i].coherence.abs() - c).abs() < 1e-12).collect();
            let exposed: Vec<usize> = idx.iter().copied().filter(|&i| plain[i].rt_steps >= onset).collect();
            let a: Vec<TrialRecord<f64>> = exposed.iter().map(|&i| pulsed[i].clone()).collect();
            let b: Vec<TrialRecord<f64>> = exposed.iter().map(|&i| plain[i].clone()).collect();
            let (ra, rb) = (rts(&a, dt), rts(&b, dt));
            let (acc_a, acc_b) = (stats::mean(&correct(&a)), stats::mean(&correct(&b)));
            let all_a: Vec<TrialRecord<f64>> = idx.iter().map(|&i| pulsed[i].clone()).collect();
            let all_b: Vec<TrialRecord<f64>> = idx.iter().map(|&i| plain[i].clone()).collect();
            PulseLevel {
                coherence: c,
                n_exposed: exposed.len(),
                rt_ms: Comparison::welch(&ra, &rb),
                rt_paired_p: stats::paired_t(&ra, &rb).p,
                accuracy_pulse: acc_a,
                accuracy_no_pulse: acc_b,
                accuracy_diff: acc_a - acc_b,
                rt_all_pulse: stats::mean(&rts(&all_a, dt)),
                rt_all_no_pulse: stats::mean(&rts(&all_b, dt)),
            }
        })
        .collect();
    Ok(PulseReport { onset: cfg.stimulus.pulse_onset, levels })
}

// ---- urgency and error RTs ---------------------------------------------

pub fn urgency_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "urgency-error-rt".into(), ..ScenarioConfig::default() };
    c.task.coherences = vec![-0.128, 0.128];
    c.run.u_test = 2400;
    c
}

pub fn urgency_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    require_test(cfg)?;
    let basic = cfg.set("agent.dynamics", toml::Value::String("accumulate".into()))?;
    let urgent = cfg.set("agent.dynamics", toml::Value::String("urgency".into()))?;
    Ok(vec![
        Condition::new("basic", basic.clone(), train_test(&basic)?),
        Condition::new("urgency", urgent.clone(), train_test(&urgent)?),
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorCorrect {
    pub label: String,
    pub accuracy: f64,
    /// Error (a) against correct (b) RT.
    pub rt_ms: Comparison,
    /// Error (a) against correct (b) |terminal state|.
    pub terminal_state: Comparison,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UrgencyReport {
    pub rho: f64,
    pub results: Vec<ErrorCorrect>,
}

pub fn error_correct(label: &str, records: &[TrialRecord<f64>], dt: f64) -> ErrorCorrect {
    let (err, ok): (Vec<TrialRecord<f64>>, Vec<TrialRecord<f64>>) = records.iter().cloned().partition(|r| !r.correct);
    ErrorCorrect {
        label: label.into(),
        accuracy: stats::mean(&correct(records)),
        rt_ms: Comparison::welch(&rts(&err, dt), &rts(&ok, dt)),
        terminal_state: Comparison::welch(&abs_terminal(&err), &abs_terminal(&ok)),
    }
}

pub fn urgency_report(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<UrgencyReport> {
    let results = conds
        .iter()
        .map(|c| error_correct(&c.label, &pooled(conds, data, &c.label, "test"), c.config.evidence.dt_ms))
        .collect();
    Ok(UrgencyReport { rho: cfg.agent.urgency_rho, results })
}

// ---- post-error slowing ------------------------------------------------

pub fn pes_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "post-error-slowing".into(), ..ScenarioConfig::default() };
    c.agent.dynamics = "urgency".into();
    c.agent.pes = true;
    c.run.u_train = 3600;
    c.run.replications = 30;
    c
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PesReport {
    pub analysis_start: u64,
    pub n_post_error: usize,
    pub n_post_correct: usize,
    /// Post-error (a) against post-correct (b), per-replication means paired.
    pub rt_ms: Comparison,
    pub rt_paired_p: f64,
    pub accuracy: Comparison,
    pub accuracy_paired_p: f64,
    pub terminal_state: Comparison,
    pub terminal_paired_p: f64,
    /// Trial-level terminal-state comparison, pooled over replications.
    pub terminal_pooled: Comparison,
}

pub fn pes_report(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<PesReport> {
    let dt = cfg.evidence.dt_ms;
    let start = cfg.protocol.analysis_start as usize;
    let label = &conds[0].label;
    let reps = per_rep(conds, data, label, &conds[0].phases[0].name);
    let mut rt = (Vec::new(), Vec::new());
    let mut acc = (Vec::new(), Vec::new());
    let mut term = (Vec::new(), Vec::new());
    let mut pooled_term = (Vec::new(), Vec::new());
    let (mut ne, mut nc) = (0, 0);
    for r in &reps {
        let (mut after_err, mut after_ok) = (Vec::new(), Vec::new());
        for i in start.max(1)..r.len() {
            if r[i - 1].correct {
                after_ok.push(r[i].clone());
            } else {
                after_err.push(r[i].clone());
            }
        }
        ne += after_err.len();
        nc += after_ok.len();
        rt.0.push(stats::mean(&rts(&after_err, dt)));
        rt.1.push(stats::mean(&rts(&after_ok, dt)));
        acc.0.push(stats::mean(&correct(&after_err)));
        acc.1.push(stats::mean(&correct(&after_ok)));
        term.0.push(stats::mean(&abs_terminal(&after_err)));
        term.1.push(stats::mean(&abs_terminal(&after_ok)));
        pooled_term.0.extend(abs_terminal(&after_err));
        pooled_term.1.extend(abs_terminal(&after_ok));
    }
    Ok(PesReport {
        analysis_start: cfg.protocol.analysis_start,
        n_post_error: ne,
        n_post_correct: nc,
        rt_paired_p: stats::paired_t(&rt.0, &rt.1).p,
        rt_ms: Comparison::welch(&rt.0, &rt.1),
        accuracy_paired_p: stats::paired_t(&acc.0, &acc.1).p,
        accuracy: Comparison::welch(&acc.0, &acc.1),
        terminal_paired_p: stats::paired_t(&term.0, &term.1).p,
        terminal_state: Comparison::welch(&term.0, &term.1),
        terminal_pooled: Comparison::welch(&pooled_term.0, &pooled_term.1),
    })
}

// ---- volatility --------------------------------------------------------

pub fn volatility_defaults() -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: "volatility".into(), ..ScenarioConfig::default() };
    c.run.u_test = 2400;
    c.run.replications = 30;
    c
}

pub fn volatility_plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    require_test(cfg)?;
    if cfg.protocol.test_sigmas.len() != 2 {
        return Err(Error::config("protocol.test_sigmas", "needs exactly two test noise levels"));
    }
    cfg.protocol
        .test_sigmas
        .iter()
        .map(|&sigma| {
            let mut phases = train_test(cfg)?;
            phases[1].plan = StimulusPlan::new(StimulusMode::Volatility { sigma }, cfg.stimulus.max_steps as usize)
                .map_err(|e| Error::config("protocol.test_sigmas", e.to_string()))?;
            Ok(Condition::new(format!("sigma={sigma}"), cfg.clone(), phases).swept("test_sigma", sigma))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolatilityReport {
    pub sigmas: Vec<f64>,
    /// First test noise level (a) against the second (b).
    pub levels: Vec<LevelComparison>,
}

pub fn volatility_report(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<VolatilityReport> {
    Ok(VolatilityReport { sigmas: cfg.protocol.test_sigmas.clone(), levels: compare_levels(conds, data) })
}


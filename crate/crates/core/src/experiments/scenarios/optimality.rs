//! Learned terminal states against the reward-maximizing bound of the
//! matching bounded-accumulation model.

use serde::Serialize;

use super::common::condition_metrics;
use crate::analysis::{expected_reward, optimal_terminal_state, BGrid};
use crate::error::{Error, Result};
use crate::experiments::config::ScenarioConfig;
use crate::experiments::replicate::Aggregate;
use crate::experiments::runner::{Condition, Phase, RunData};

fn base(name: &str, delta: f64) -> ScenarioConfig {
    let mut c = ScenarioConfig { scenario: name.into(), ..ScenarioConfig::default() };
    c.space.delta = delta;
    c.agent.epsilon = 0.01;
    c.agent.gamma = 1.0;
    c.rewards.r_correct = 500.0;
    c.rewards.r_wrong = -1200.0;
    c.rewards.r_wait = -1.0;
    c.task.coherences = vec![-0.064, 0.064];
    c.run.u_train = 3000;
    c.run.replications = 5;
    c
}

pub fn fine_defaults() -> ScenarioConfig {
    base("optimality-fine", 0.1)
}

pub fn coarse_defaults() -> ScenarioConfig {
    base("optimality-coarse", 1.0)
}

/// The task's single |coherence|.
fn task_strength(cfg: &ScenarioConfig) -> Result<f64> {
    let mut s: Vec<f64> = cfg.task.coherences.iter().map(|c| c.abs()).collect();
    s.sort_by(f64::total_cmp);
    s.dedup();
    match s.as_slice() {
        [c] if *c > 0.0 => Ok(*c),
        _ => Err(Error::config("task.coherences", "optimality needs a single nonzero |coherence|")),
    }
}

pub fn epsilon_label(v: f64) -> String {
    format!("eps={v}")
}

pub fn plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    task_strength(cfg)?;
    let mut eps = cfg.protocol.epsilons.clone();
    eps.push(cfg.agent.epsilon);
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let mut conds = Vec::new();
    for v in eps {
        let c = cfg.set_number("agent.epsilon", v)?;
        conds.push(Condition::new(epsilon_label(v), c.clone(), vec![Phase::train(&c, c.run.u_train)?]).swept("agent.epsilon", v));
    }
    let swept = cfg.set_number("agent.epsilon", cfg.protocol.sweep_epsilon)?;
    for &v in &cfg.protocol.coherence_sweep {
        let mut c = swept.clone();
        c.task.coherences = vec![-v, v];
        c.validate()?;
        conds.push(
            Condition::new(format!("c={v}"), c.clone(), vec![Phase::train(&c, cfg.protocol.sweep_trials)?]).swept("coherence", v),
        );
    }
    Ok(conds)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalityPoint {
    pub epsilon: f64,
    pub coherence: f64,
    pub b_star: f64,
    pub er_at_b_star: f64,
    pub terminal_state: Aggregate,
    /// Closed-form expected reward at the learned terminal state.
    pub er_at_learned: f64,
    /// (learned - b_star) / b_star.
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalityReport {
    /// The point at the configured epsilon.
    pub main: OptimalityPoint,
    pub epsilon_sweep: Vec<OptimalityPoint>,
    pub coherence_sweep: Vec<OptimalityPoint>,
    pub optimal_rises_then_falls: bool,
    pub model_rises_then_falls: bool,
}

pub fn report(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<OptimalityReport> {
    let grid = BGrid { b_max: cfg.protocol.b_max, b_step: cfg.protocol.b_step };
    let rewards = cfg.reward_set()?;
    let k = cfg.evidence.k;
    let metrics = condition_metrics(conds, data);
    let mut eps_pts = Vec::new();
    let mut c_pts = Vec::new();
    for (cond, m) in conds.iter().zip(metrics) {
        let c = task_strength(&cond.config)?;
        let (b_star, er) = optimal_terminal_state(k, c, &rewards, &grid)?;
        let learned = m.terminal_state.mean;
        let pt = OptimalityPoint {
            epsilon: cond.config.agent.epsilon,
            coherence: c,
            b_star,
            er_at_b_star: er,
            terminal_state: m.terminal_state,
            er_at_learned: expected_reward(learned, k, c, &rewards),
            rel_error: (learned - b_star) / b_star,
        };
        match cond.sweep.as_ref().map(|s| s.0.as_str()) {
            Some("coherence") => c_pts.push(pt),
            _ => eps_pts.push(pt),
        }
    }
    let main = eps_pts
        .iter()
        .find(|p| p.epsilon == cfg.agent.epsilon)
        .cloned()
        .ok_or_else(|| Error::Internal("configured epsilon missing from the sweep".into()))?;
    let b: Vec<f64> = c_pts.iter().map(|p| p.b_star).collect();
    let l: Vec<f64> = c_pts.iter().map(|p| p.terminal_state.mean).collect();
    Ok(OptimalityReport {
        main,
        optimal_rises_then_falls: super::common::rises_then_falls(&b, 0),
        model_rises_then_falls: super::common::rises_then_falls(&l, 0),
        epsilon_sweep: eps_pts,
        coherence_sweep: c_pts,
    })
}

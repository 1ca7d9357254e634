//! Deterministic limit of the model (noiseless unit evidence, full
//! replacement learning, no discounting, argmax policy). Its Q-table can be
//! replayed exactly by a plain lookup table, which makes it an oracle for
//! the learning engine.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::agent::{Action, QTable, Session, State, Step, TrialEnv};
use crate::error::{Error, Result};

/// Qualitative stage of the toy Q-table, read off states 0 and +-1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToyStage {
    /// All actions tie at state 0.
    Symmetric,
    /// Left or Right strictly preferred at 0.
    TerminatingAtZero,
    /// Wait strictly preferred at 0.
    WaitAtZero,
    /// Wait at 0, Right at +1, Left at -1.
    SidesResolved,
}

pub fn toy_stage(q: &QTable<f64>) -> Option<ToyStage> {
    let [l, r, w] = q.row(State(0));
    if l == r && r == w {
        return Some(ToyStage::Symmetric);
    }
    if l.max(r) > w {
        return Some(ToyStage::TerminatingAtZero);
    }
    if w > l.max(r) {
        let [pl, pr, pw] = q.row(State(1));
        let [nl, nr, nw] = q.row(State(-1));
        if pr > pl.max(pw) && nl > nr.max(nw) {
            return Some(ToyStage::SidesResolved);
        }
        return Some(ToyStage::WaitAtZero);
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyReport {
    pub seed: u64,
    pub trials: u64,
    pub steps_checked: usize,
    /// Waits taken in the first trial before it terminated.
    pub first_trial_waits: usize,
    /// Stages in the order first reached, with the trial count at which each
    /// was first observed.
    pub stages: Vec<(ToyStage, u64)>,
    /// First disagreement between the engine and the replay, if any.
    pub mismatch: Option<String>,
    pub passed: bool,
}

/// Check that a config is the toy limit.
pub fn ensure_toy(cfg: &ScenarioConfig) -> Result<()> {
    let a = &cfg.agent;
    let checks = [
        ("evidence.sigma", cfg.evidence.sigma == 0.0),
        ("agent.epsilon", a.epsilon == 1.0),
        ("agent.gamma", a.gamma == 0.0),
        ("agent.gamma_terminal", a.gamma_terminal == 0.0),
        ("agent.beta", a.beta == f64::INFINITY),
        ("agent.dynamics", a.dynamics == "accumulate"),
        ("agent.wait_schedule", a.wait_schedule == "constant"),
        ("task.coherences", cfg.task.coherences.iter().all(|c| c.abs() == 1.0)),
    ];
    for (path, ok) in checks {
        if !ok {
            return Err(Error::config(path, "not the toy limit (sigma 0, epsilon 1, gamma 0, beta inf, c = +-1)"));
        }
    }
    Ok(())
}

/// Run one toy session and replay it against a lookup-table oracle.
pub fn check_toy_session(cfg: &ScenarioConfig, seed: u64) -> Result<ToyReport> {
    ensure_toy(cfg)?;
    let params = cfg.agent_params()?;
    let evidence = cfg.evidence_params()?;
    let plan = cfg.plan();
    let rewards = cfg.reward_set()?;
    let prior = cfg.prior()?;
    let space = cfg.state_space()?;
    let env = TrialEnv { params: &params, evidence: &evidence, plan: &plan, rewards: &rewards };
    let mut session = Session::new(space, seed);

    let mut oracle: BTreeMap<(i64, usize), f64> = BTreeMap::new();
    let mut stages: Vec<(ToyStage, u64)> = vec![(ToyStage::Symmetric, 0)];
    let mut mismatch: Option<String> = None;
    let mut steps_checked = 0usize;
    let mut first_trial_waits = 0usize;

    for u in 0..cfg.run.u_train {
        let mut steps: Vec<Step<f64>> = Vec::new();
        let rec = session.step_observed(&prior, &env, &mut |s| steps.push(*s))?;
        if u == 0 {
            first_trial_waits = rec.rt_steps;
        }
        let direction = rec.coherence.signum() as i64;
        for st in &steps {
            if mismatch.is_some() {
                break;
            }
            let row: Vec<f64> = Action::ALL.iter().map(|a| *oracle.get(&(st.state.0, a.index())).unwrap_or(&0.0)).collect();
            let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let expected_reward = match st.action {
                Action::Wait => rewards.r_wait,
                a if (a == Action::Right) == (direction > 0) => rewards.r_correct,
                _ => rewards.r_wrong,
            };
            let expected_next = match st.action {
                Action::Wait => (st.state.0 + direction).clamp(-space.half_width(), space.half_width()),
                _ => st.state.0,
            };
            if row[st.action.index()] != best {
                mismatch = Some(format!("trial {u} t {}: engine chose {:?} at s={} but oracle row is {row:?}", st.t, st.action, st.state.0));
            } else if st.reward != expected_reward {
                mismatch = Some(format!("trial {u} t {}: reward {} expected {expected_reward}", st.t, st.reward));
            } else if st.next_state.0 != expected_next {
                mismatch = Some(format!("trial {u} t {}: next state {} expected {expected_next}", st.t, st.next_state.0));
            }
            oracle.insert((st.state.0, st.action.index()), st.reward);
            steps_checked += 1;
        }
        if mismatch.is_none() {
            for (s, row) in session.q.rows() {
                for a in Action::ALL {
                    let want = *oracle.get(&(s.0, a.index())).unwrap_or(&0.0);
                    if row[a.index()] != want {
                        mismatch = Some(format!("after trial {u}: Q({}, {:?}) = {} but oracle has {want}", s.0, a, row[a.index()]));
                    }
                }
            }
        }
        if let Some(stage) = toy_stage(&session.q) {
            if stages.last().is_none_or(|(last, _)| *last != stage) {
                stages.push((stage, u + 1));
            }
        }
    }

    let order: Vec<ToyStage> = stages.iter().map(|s| s.0).collect();
    let monotone = order.windows(2).all(|w| w[1] > w[0]);
    let complete = if first_trial_waits >= 1 {
        order
            == [ToyStage::Symmetric, ToyStage::TerminatingAtZero, ToyStage::WaitAtZero, ToyStage::SidesResolved]
    } else {
        order.last() == Some(&ToyStage::SidesResolved)
    };
    let passed = mismatch.is_none() && monotone && complete;
    Ok(ToyReport {
        seed,
        trials: cfg.run.u_train,
        steps_checked,
        first_trial_waits,
        stages,
        mismatch,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::registry::scenario_defaults;

    #[test]
    fn replay_agrees_over_many_seeds() {
        let cfg = scenario_defaults("toy-oracle").unwrap();
        for seed in 0..50 {
            let r = check_toy_session(&cfg, seed).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn non_toy_config_is_rejected() {
        assert!(check_toy_session(&ScenarioConfig::default(), 0).is_err());
    }
}

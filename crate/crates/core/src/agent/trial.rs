use rand::Rng;

use super::params::{pes_rho, urgency_evidence, wait_cost_at};
use super::policy::select_action;
use super::space::{accumulate_state, extrema_state};
use super::{Action, AgentParams, Dynamics, QTable, State, StateSpace, td_update};
use crate::env::{
    reward_for, sample_coherence, sample_evidence, Coherence, CoherencePrior, EvidenceParams, PulseHistory,
    RewardSet, StimulusPlan,
};
use crate::error::Result;
use crate::rng::SessionRng;
use crate::scalar::Scalar;

/// Everything a trial needs besides the Q-table and the random streams.
#[derive(Clone, Copy, Debug)]
pub struct TrialEnv<'a, T> {
    pub params: &'a AgentParams<T>,
    pub evidence: &'a EvidenceParams<T>,
    pub plan: &'a StimulusPlan<T>,
    pub rewards: &'a RewardSet<T>,
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord<T> {
    pub trial: u64,
    pub coherence: T,
    /// Left or Right; timed-out trials carry the forced choice.
    pub choice: Action,
    pub correct: bool,
    /// Number of Wait actions before the terminating action.
    pub rt_steps: usize,
    pub terminal_state: State,
    /// Lattice value of `terminal_state`.
    pub terminal_value: T,
    /// Reward of the terminating action.
    pub reward: T,
    pub timed_out: bool,
}

impl<T: Scalar> TrialRecord<T> {
    pub fn rt_ms(&self, dt_ms: T) -> T {
        T::lit(self.rt_steps as f64) * dt_ms
    }
}

/// One within-trial transition, reported to trial observers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step<T> {
    pub t: usize,
    pub state: State,
    pub action: Action,
    pub reward: T,
    pub next_state: State,
}

/// Run a single trial starting from state 0, updating `q` in place.
///
/// At `plan.max_steps` Waits the agent is forced to choose between Left and
/// Right (softmax restricted to those two) and the record is marked as
/// timed out. `rho` is the urgency gain used when the dynamics is
/// [`Dynamics::Urgency`]; it is ignored otherwise.
#[allow(clippy::too_many_arguments)]
pub fn run_trial<T, RA, RE>(
    q: &mut QTable<T>,
    c: Coherence<T>,
    u: u64,
    rho: T,
    env: &TrialEnv<'_, T>,
    agent_rng: &mut RA,
    evidence_rng: &mut RE,
    observer: &mut dyn FnMut(&Step<T>),
) -> Result<TrialRecord<T>>
where
    T: Scalar,
    RA: Rng + ?Sized,
    RE: Rng + ?Sized,
{
    let p = env.params;
    let space = *q.space();
    let r_wait = wait_cost_at(u, &p.wait_schedule, env.rewards.r_wait);
    let mut history = PulseHistory::default();
    let mut s = State::ZERO;
    let mut t = 0usize;
    loop {
        let timed_out = t >= env.plan.max_steps;
        let allowed = if timed_out { [true, true, false] } else { [true; 3] };
        let action = select_action(q.row(s), p.beta, allowed, agent_rng);
        if action == Action::Wait {
            let e = sample_evidence(c, env.evidence, env.plan, t, &mut history, evidence_rng)?;
            let next = match p.dynamics {
                Dynamics::Accumulate => accumulate_state(s, e, env.evidence, &space),
                Dynamics::Extrema => extrema_state(e, &space),
                Dynamics::Urgency { .. } => accumulate_state(s, urgency_evidence(e, t, rho), env.evidence, &space),
            };
            td_update(q, s, Action::Wait, r_wait, next, p.epsilon, p.gamma);
            observer(&Step { t, state: s, action, reward: r_wait, next_state: next });
            s = next;
            t += 1;
        } else {
            let (r, correct) = reward_for(action, c, env.rewards, agent_rng);
            td_update(q, s, action, r, s, p.epsilon, p.gamma_terminal);
            observer(&Step { t, state: s, action, reward: r, next_state: s });
            return Ok(TrialRecord {
                trial: u,
                coherence: c.value(),
                choice: action,
                correct: correct.unwrap_or(false),
                rt_steps: t,
                terminal_state: s,
                terminal_value: space.value(s),
                reward: r,
                timed_out,
            });
        }
    }
}

/// A learning session: one Q-table carried across consecutive trials.
#[derive(Clone, Debug)]
pub struct Session<T> {
    pub q: QTable<T>,
    rng: SessionRng,
    next_trial: u64,
    last_reward: Option<T>,
}

impl<T: Scalar> Session<T> {
    pub fn new(space: StateSpace<T>, seed: u64) -> Self {
        Self::with_table(QTable::zeros(space), seed)
    }

    pub fn with_table(q: QTable<T>, seed: u64) -> Self {
        Self { q, rng: SessionRng::new(seed), next_trial: 0, last_reward: None }
    }

    /// Index of the next trial to run.
    pub fn trials_done(&self) -> u64 {
        self.next_trial
    }

    fn urgency_gain(&self, params: &AgentParams<T>) -> T {
        match (params.dynamics, params.pes) {
            (Dynamics::Urgency { .. }, Some(rule)) => pes_rho(self.last_reward, &rule),
            (Dynamics::Urgency { rho }, None) => rho,
            _ => T::zero(),
        }
    }

    /// Run one trial with a coherence drawn from `prior`.
    pub fn step(&mut self, prior: &CoherencePrior<T>, env: &TrialEnv<'_, T>) -> Result<TrialRecord<T>> {
        self.step_observed(prior, env, &mut |_| {})
    }

    pub fn step_observed(
        &mut self,
        prior: &CoherencePrior<T>,
        env: &TrialEnv<'_, T>,
        observer: &mut dyn FnMut(&Step<T>),
    ) -> Result<TrialRecord<T>> {
        let u = self.next_trial;
        let c = sample_coherence(prior, &mut self.rng.coherence);
        let rho = self.urgency_gain(env.params);
        let mut evidence_rng = self.rng.evidence_for_trial(u);
        let rec = run_trial(&mut self.q, c, u, rho, env, &mut self.rng.agent, &mut evidence_rng, observer)?;
        self.next_trial += 1;
        self.last_reward = Some(rec.reward);
        Ok(rec)
    }

    /// Run `n` trials, capturing a snapshot whenever the number of completed
    /// trials equals an entry of `snapshot_at` (0 = before any trial).
    pub fn run_block(
        &mut self,
        n: u64,
        prior: &CoherencePrior<T>,
        env: &TrialEnv<'_, T>,
        snapshot_at: &[u64],
        snapshots: &mut Vec<(u64, QTable<T>)>,
    ) -> Result<Vec<TrialRecord<T>>> {
        let mut out = Vec::with_capacity(n as usize);
        let capture = |s: &Self, snaps: &mut Vec<(u64, QTable<T>)>| {
            if snapshot_at.contains(&s.next_trial) && !snaps.iter().any(|(k, _)| *k == s.next_trial) {
                snaps.push((s.next_trial, s.q.clone()));
            }
        };
        capture(self, snapshots);
        for _ in 0..n {
            out.push(self.step(prior, env)?);
            capture(self, snapshots);
        }
        Ok(out)
    }
}

/// Records and snapshots of a single-block session.
#[derive(Clone, Debug)]
pub struct SessionOutcome<T> {
    pub records: Vec<TrialRecord<T>>,
    pub snapshots: Vec<(u64, QTable<T>)>,
    pub final_q: QTable<T>,
}

/// `trials` consecutive learning trials from `initial`, seeded by `seed`.
pub fn run_session<T: Scalar>(
    initial: QTable<T>,
    trials: u64,
    prior: &CoherencePrior<T>,
    env: &TrialEnv<'_, T>,
    snapshot_at: &[u64],
    seed: u64,
) -> Result<SessionOutcome<T>> {
    let mut session = Session::with_table(initial, seed);
    let mut snapshots = Vec::new();
    let records = session.run_block(trials, prior, env, snapshot_at, &mut snapshots)?;
    Ok(SessionOutcome { records, snapshots, final_q: session.q })
}

/// Demonstration trials observed before instrumental learning.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarmupSpec<T> {
    pub trials: usize,
    pub steps: usize,
    pub coherence: T,
    pub rewards: RewardSet<T>,
}

impl Default for WarmupSpec<f64> {
    fn default() -> Self {
        Self {
            trials: 8,
            steps: 300,
            coherence: 0.512,
            rewards: RewardSet { r_correct: 100.0, r_wrong: -50.0, r_wait: -1.0 },
        }
    }
}

/// Observational learning: the learner watches a demonstrator wait for
/// `spec.steps` steps on a strong stimulus and then pick the correct side,
/// applying its own TD updates along the way. Starts from an all-zero table.
pub fn observational_warmup<T: Scalar, R: Rng + ?Sized>(
    spec: &WarmupSpec<T>,
    params: &AgentParams<T>,
    space: StateSpace<T>,
    evidence: &EvidenceParams<T>,
    rng: &mut R,
) -> Result<QTable<T>> {
    let mut q = QTable::zeros(space);
    let c = Coherence::new(spec.coherence)?;
    let plan = StimulusPlan::plain(spec.steps.max(1));
    let correct = c.correct_action().unwrap_or(Action::Right);
    for _ in 0..spec.trials {
        let mut history = PulseHistory::default();
        let mut s = State::ZERO;
        for t in 0..spec.steps {
            let e = sample_evidence(c, evidence, &plan, t, &mut history, rng)?;
            let next = accumulate_state(s, e, evidence, &space);
            td_update(&mut q, s, Action::Wait, spec.rewards.r_wait, next, params.epsilon, params.gamma);
            s = next;
        }
        td_update(&mut q, s, correct, spec.rewards.r_correct, s, params.epsilon, params.gamma_terminal);
    }
    Ok(q)
}

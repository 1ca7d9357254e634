//! The Q-learning decision maker.
//!
//! The agent holds nothing but a [`QTable`] over a discrete state lattice.
//! Within a trial it either waits (paying `r_wait`, sampling one more
//! evidence step) or commits to Left/Right, which ends the trial. There is
//! no decision bound anywhere; terminal states emerge from learning.

mod params;
mod policy;
mod qtable;
mod space;
mod trial;

use serde::{Deserialize, Serialize};

pub use params::{pes_rho, urgency_evidence, wait_cost_at, AgentParams, Dynamics, PesRule, WaitSchedule};
pub use policy::{select_action, softmax_policy, softmax_probabilities};
pub use qtable::{td_update, QTable};
pub use space::{accumulate_state, extrema_state, quantize, State, StateSpace};
pub use trial::{observational_warmup, run_session, run_trial, Session, SessionOutcome, Step, TrialEnv, TrialRecord, WarmupSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Left,
    Right,
    Wait,
}

impl Action {
    /// Column order used by the Q-table and its snapshot files.
    pub const ALL: [Action; 3] = [Action::Left, Action::Right, Action::Wait];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Action::Left => 0,
            Action::Right => 1,
            Action::Wait => 2,
        }
    }

    #[inline]
    pub fn is_terminating(self) -> bool {
        !matches!(self, Action::Wait)
    }

    pub fn code(self) -> &'static str {
        match self {
            Action::Left => "L",
            Action::Right => "R",
            Action::Wait => "W",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "L" => Some(Action::Left),
            "R" => Some(Action::Right),
            "W" => Some(Action::Wait),
            _ => None,
        }
    }
}

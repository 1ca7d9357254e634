//! Simulation engine for a Q-learning agent that decides when to stop
//! sampling noisy evidence and which way to report, with no explicit
//! decision bound.

pub mod agent;
pub mod analysis;
pub mod env;
pub mod error;
pub mod experiments;
pub mod io;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type QTable64 = agent::QTable<f64>;
pub type QTable32 = agent::QTable<f32>;
pub type StateSpace64 = agent::StateSpace<f64>;
pub type AgentParams64 = agent::AgentParams<f64>;
pub type TrialRecord64 = agent::TrialRecord<f64>;
pub type RewardSet64 = env::RewardSet<f64>;
pub type EvidenceParams64 = env::EvidenceParams<f64>;
pub type CoherencePrior64 = env::CoherencePrior<f64>;

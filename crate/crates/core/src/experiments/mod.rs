//! Named scenarios, replication and parameter sweeps.

pub mod config;
pub mod oracle;
pub mod registry;
pub mod replicate;
pub mod runner;
pub mod scenarios;
pub mod sweep;
pub mod toy;

pub use config::{Merged, ScenarioConfig};
pub use oracle::{self_checks, OracleCheck};
pub use registry::{plan, registry, run_scenario, scenario_defaults, summarize, ScenarioInfo, ScenarioRun, Summary};
pub use replicate::{replicate, Aggregate};
pub use runner::{execute, Condition, Init, Phase, RunData, RunRecord};
pub use sweep::{sweep, SweepResult, SweepRow};

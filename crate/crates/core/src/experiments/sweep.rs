//! One-parameter sweeps over a scenario, run with shared replication seeds.

use serde::Serialize;

use super::config::ScenarioConfig;
use super::registry::{run_scenario, ScenarioRun};
use super::scenarios::condition_metrics;
use crate::error::{Error, Result};

/// One line of the long-format sweep table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub condition: String,
    pub metric: &'static str,
    pub mean: f64,
    pub std: f64,
    pub sem: f64,
    pub n: usize,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub param: String,
    pub runs: Vec<(f64, ScenarioRun)>,
    pub rows: Vec<SweepRow>,
}

/// Run `cfg` once per value of `param`. Values must be non-empty and
/// strictly monotone; `cbr` derives `rewards.r_wrong` from `r_correct`.
pub fn sweep(cfg: &ScenarioConfig, param: &str, values: &[f64]) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::config(param, "sweep needs at least one value"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::config(param, "sweep values must be finite"));
    }
    let up = values.windows(2).all(|w| w[1] > w[0]);
    let down = values.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::config(param, "sweep values must be strictly monotone"));
    }
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for &v in values {
        let point = cfg.set_number(param, v)?;
        let run = run_scenario(&point)?;
        for m in condition_metrics(&run.conditions, &run.data) {
            for (metric, a) in [("terminal_state", m.terminal_state), ("accuracy", m.accuracy), ("mean_rt_ms", m.mean_rt_ms)] {
                rows.push(SweepRow { value: v, condition: m.label.clone(), metric, mean: a.mean, std: a.std, sem: a.sem, n: a.n });
            }
        }
        runs.push((v, run));
    }
    Ok(SweepResult { param: param.to_string(), runs, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::registry::scenario_defaults;

    fn small() -> ScenarioConfig {
        let mut cfg = scenario_defaults("baseline-training").unwrap();
        cfg.run.u_train = 60;
        cfg.run.replications = 2;
        cfg.run.snapshot_trials = vec![];
        cfg
    }

    #[test]
    fn single_value_matches_run_scenario() {
        let cfg = small();
        let s = sweep(&cfg, "agent.epsilon", &[0.2]).unwrap();
        let direct = run_scenario(&cfg.set_number("agent.epsilon", 0.2).unwrap()).unwrap();
        assert_eq!(s.runs[0].1.data, direct.data);
        assert_eq!(s.runs[0].1.summary, direct.summary);
    }

    #[test]
    fn rejects_bad_values() {
        let cfg = small();
        assert!(sweep(&cfg, "agent.epsilon", &[]).is_err());
        assert!(sweep(&cfg, "agent.epsilon", &[0.1, 0.1]).is_err());
        assert!(sweep(&cfg, "agent.dynamics", &[1.0]).is_err());
        assert!(sweep(&cfg, "no.such", &[1.0]).is_err());
    }

    #[test]
    fn cbr_sweep_sets_r_wrong() {
        let cfg = small();
        let s = sweep(&cfg, "cbr", &[0.5, 2.0]).unwrap();
        assert_eq!(s.runs[1].1.config.rewards.r_wrong, -40.0);
        assert_eq!(s.rows.len(), 2 * 3);
    }
}

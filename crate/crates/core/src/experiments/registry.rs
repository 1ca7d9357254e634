//! The scenario table and its dispatch.

use serde::Serialize;
use serde_json::{json, Value};

use super::config::ScenarioConfig;
use super::runner::{execute, Condition, RunData};
use super::scenarios::{condition_metrics, optimality, supplementary, tradeoff, training, variants};
use crate::agent::QTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    /// The result this scenario regenerates.
    pub figure: &'static str,
    pub description: &'static str,
}

const REGISTRY: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "toy-oracle",
        figure: "hand-traced Q-table stages of the noiseless toy model",
        description: "Deterministic limit replayed against a lookup-table oracle",
    },
    ScenarioInfo {
        name: "baseline-training",
        figure: "Q-table evolution and terminal-state histograms over training",
        description: "Blank-slate learning with default parameters, 2400 trials, 30 replications",
    },
    ScenarioInfo {
        name: "trained-psychometrics",
        figure: "trained psychometric and chronometric curves with bounded-accumulation predictions",
        description: "2400 learning trials then 2400 frozen test trials, compared with the closed forms",
    },
    ScenarioInfo {
        name: "learning-dynamics",
        figure: "accuracy, RT, threshold and lapse over the course of learning",
        description: "Smoothed learning curves and quartile Weibull fits, 30 replications",
    },
    ScenarioInfo {
        name: "sat-cbr",
        figure: "speed-accuracy trade-off across cost-benefit ratios",
        description: "Log-spaced CBR sweep with r_correct fixed, 900 trials, 30 replications",
    },
    ScenarioInfo {
        name: "sat-waitcost",
        figure: "speed-accuracy trade-off under a higher cost of waiting",
        description: "r_wait -1 against -2 at fixed CBR, 1200 learning plus 1200 frozen trials",
    },
    ScenarioInfo {
        name: "optimality-fine",
        figure: "learned against reward-maximizing terminal states, fine lattice",
        description: "Delta 0.1, R = [500, -1200, -1], c = 0.064, with epsilon and coherence sweeps",
    },
    ScenarioInfo {
        name: "optimality-coarse",
        figure: "learned against reward-maximizing terminal states, unit lattice",
        description: "As optimality-fine with Delta 1",
    },
    ScenarioInfo {
        name: "extrema-vs-accumulation",
        figure: "extrema detection against accumulation across drift gains",
        description: "Both state dynamics over a K sweep, 900 learning plus 900 frozen trials, 20 replications",
    },
    ScenarioInfo {
        name: "observational-warmup",
        figure: "learning after watching a patient demonstrator",
        description: "Warm-up initialized against blank-slate learners, R = [100, -50, -1], 400 trials",
    },
    ScenarioInfo {
        name: "timed-waitcost",
        figure: "RT and accuracy under a wait cost that grows with trial count",
        description: "Sigmoid wait-cost schedule, 2400 trials, 50 replications",
    },
    ScenarioInfo {
        name: "prior-8020",
        figure: "choice and RT bias after a block of disproportionate stimuli",
        description: "3600 balanced trials then 900 at 80:20 or 50:50, 30 replications",
    },
    ScenarioInfo {
        name: "reverse-pulse",
        figure: "RT and accuracy with a zero-sum reverse pulse",
        description: "Trained learner tested with and without a mirrored evidence window at c in {0, 3.2%}",
    },
    ScenarioInfo {
        name: "urgency-error-rt",
        figure: "error against correct RT with and without urgency",
        description: "Basic and urgency dynamics at c = 12.8%",
    },
    ScenarioInfo {
        name: "post-error-slowing",
        figure: "post-error against post-correct behavior under outcome-dependent urgency",
        description: "Urgency gain set by the previous outcome, trials from 1200 on",
    },
    ScenarioInfo {
        name: "volatility",
        figure: "accuracy and RT under higher evidence volatility",
        description: "Trained at sigma 1, tested at sigma 1 and 1.3",
    },
    ScenarioInfo {
        name: "param-sensitivity",
        figure: "terminal state against each model parameter",
        description: "One-at-a-time sweeps of beta, epsilon, gamma, rewards, M and U, 30 replications",
    },
];

pub fn registry() -> &'static [ScenarioInfo] {
    REGISTRY
}

pub fn info(name: &str) -> Result<&'static ScenarioInfo> {
    REGISTRY.iter().find(|s| s.name == name).ok_or_else(|| Error::UnknownScenario {
        name: name.to_string(),
        available: REGISTRY.iter().map(|s| s.name.to_string()).collect(),
    })
}

/// Full default config of a scenario.
pub fn scenario_defaults(name: &str) -> Result<ScenarioConfig> {
    let cfg = match info(name)?.name {
        "toy-oracle" => supplementary::toy_defaults(),
        "baseline-training" => training::baseline_defaults(),
        "trained-psychometrics" => training::psychometrics_defaults(),
        "learning-dynamics" => training::learning_defaults(),
        "sat-cbr" => tradeoff::cbr_defaults(),
        "sat-waitcost" => tradeoff::waitcost_defaults(),
        "optimality-fine" => optimality::fine_defaults(),
        "optimality-coarse" => optimality::coarse_defaults(),
        "extrema-vs-accumulation" => variants::extrema_defaults(),
        "observational-warmup" => supplementary::warmup_defaults(),
        "timed-waitcost" => tradeoff::timed_defaults(),
        "prior-8020" => variants::prior_defaults(),
        "reverse-pulse" => variants::pulse_defaults(),
        "urgency-error-rt" => variants::urgency_defaults(),
        "post-error-slowing" => variants::pes_defaults(),
        "volatility" => variants::volatility_defaults(),
        "param-sensitivity" => supplementary::sensitivity_defaults(),
        other => return Err(Error::Internal(format!("registered scenario {other} has no defaults"))),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Conditions of the scenario named by `cfg.scenario`.
pub fn plan(cfg: &ScenarioConfig) -> Result<Vec<Condition>> {
    cfg.validate()?;
    match info(&cfg.scenario)?.name {
        "toy-oracle" => supplementary::toy_plan(cfg),
        "baseline-training" | "learning-dynamics" | "post-error-slowing" => training::train_only_plan(cfg),
        "trained-psychometrics" => training::train_test_plan(cfg),
        "sat-cbr" => tradeoff::cbr_plan(cfg),
        "sat-waitcost" => tradeoff::waitcost_plan(cfg),
        "timed-waitcost" => tradeoff::timed_plan(cfg),
        "optimality-fine" | "optimality-coarse" => optimality::plan(cfg),
        "extrema-vs-accumulation" => variants::extrema_plan(cfg),
        "observational-warmup" => supplementary::warmup_plan(cfg),
        "prior-8020" => variants::prior_plan(cfg),
        "reverse-pulse" => variants::pulse_plan(cfg),
        "urgency-error-rt" => variants::urgency_plan(cfg),
        "volatility" => variants::volatility_plan(cfg),
        "param-sensitivity" => supplementary::sensitivity_plan(cfg),
        other => Err(Error::Internal(format!("registered scenario {other} has no plan"))),
    }
}

/// Scenario summary: a JSON report, mean Q-tables worth keeping, and any
/// failed self-checks.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub report: Value,
    pub tables: Vec<(String, QTable<f64>)>,
    pub failures: Vec<String>,
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Internal(format!("summary serialization: {e}")))
}

/// Summarize stored runs. Depends only on the config, the plan and the
/// recorded trials and snapshots, so a bundle can be re-analyzed.
pub fn summarize(cfg: &ScenarioConfig, conds: &[Condition], data: &RunData) -> Result<Summary> {
    let mut tables = Vec::new();
    let mut failures = Vec::new();
    let details = match info(&cfg.scenario)?.name {
        "toy-oracle" => {
            let r = supplementary::toy_report(cfg)?;
            for s in r.sessions.iter().filter(|s| !s.passed) {
                failures.push(format!(
                    "toy replay seed {}: {}",
                    s.seed,
                    s.mismatch.clone().unwrap_or_else(|| format!("stage order {:?}", s.stages))
                ));
            }
            to_value(&r)?
        }
        "baseline-training" => {
            let (r, t) = training::baseline_report(cfg, conds, data)?;
            tables = t;
            to_value(&r)?
        }
        "trained-psychometrics" => {
            tables = training::mean_snapshots(cfg, data, "trained")
                .into_iter()
                .map(|(t, q)| (format!("mean_t{t:05}"), q))
                .collect();
            to_value(&training::psychometrics_report(cfg, conds, data)?)?
        }
        "learning-dynamics" => to_value(&training::learning_report(cfg, conds, data)?)?,
        "sat-cbr" => to_value(&tradeoff::cbr_report(conds, data)?)?,
        "sat-waitcost" => to_value(&tradeoff::waitcost_report(conds, data)?)?,
        "timed-waitcost" => to_value(&tradeoff::timed_report(cfg, conds, data)?)?,
        "optimality-fine" | "optimality-coarse" => to_value(&optimality::report(cfg, conds, data)?)?,
        "extrema-vs-accumulation" => to_value(&variants::extrema_report(cfg, conds, data)?)?,
        "observational-warmup" => {
            let (r, t) = supplementary::warmup_report(cfg, conds, data)?;
            tables = t;
            to_value(&r)?
        }
        "prior-8020" => to_value(&variants::prior_report(cfg, conds, data)?)?,
        "reverse-pulse" => to_value(&variants::pulse_report(cfg, conds, data)?)?,
        "urgency-error-rt" => to_value(&variants::urgency_report(cfg, conds, data)?)?,
        "post-error-slowing" => to_value(&variants::pes_report(cfg, conds, data)?)?,
        "volatility" => to_value(&variants::volatility_report(cfg, conds, data)?)?,
        "param-sensitivity" => to_value(&supplementary::sensitivity_report(conds, data)?)?,
        other => return Err(Error::Internal(format!("registered scenario {other} has no summary"))),
    };
    let report = json!({
        "scenario": cfg.scenario,
        "figure": info(&cfg.scenario)?.figure,
        "conditions": to_value(&condition_metrics(conds, data))?,
        "details": details,
    });
    Ok(Summary { report, tables, failures })
}

/// A completed scenario run.
#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub conditions: Vec<Condition>,
    pub data: RunData,
    pub summary: Summary,
}

/// Plan, execute and summarize `cfg` with its own replication count and
/// base seed.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    let conditions = plan(cfg)?;
    let data = execute(&conditions, cfg.run.replications, cfg.run.base_seed)?;
    let summary = summarize(cfg, &conditions, &data)?;
    Ok(ScenarioRun { config: cfg.clone(), conditions, data, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_complete() {
        assert!(registry().len() >= 15);
        for s in registry() {
            assert!(!s.figure.is_empty(), "{}", s.name);
            let cfg = scenario_defaults(s.name).unwrap();
            assert_eq!(cfg.scenario, s.name);
            assert!(!plan(&cfg).unwrap().is_empty(), "{}", s.name);
        }
        assert!(registry().iter().any(|s| s.name == "optimality-fine"));
    }

    #[test]
    fn unknown_scenario_lists_the_registry() {
        match scenario_defaults("nosuch") {
            Err(Error::UnknownScenario { available, .. }) => assert_eq!(available.len(), registry().len()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn toy_scenario_passes() {
        let run = run_scenario(&scenario_defaults("toy-oracle").unwrap()).unwrap();
        assert!(run.summary.failures.is_empty(), "{:?}", run.summary.failures);
    }
}

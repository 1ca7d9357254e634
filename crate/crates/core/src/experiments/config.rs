//! Complete, serializable description of a scenario run.
//!
//! Every knob consumed at runtime lives here so that the TOML echo written
//! into each bundle is enough to re-run it. Scenario-specific knobs live in
//! [`ProtocolSection`]; a scenario ignores the ones it does not use.

use serde::{Deserialize, Serialize};

use crate::agent::{AgentParams, Dynamics, PesRule, StateSpace, WaitSchedule, WarmupSpec};
use crate::env::{CoherencePrior, EvidenceParams, RewardSet, StimulusPlan};
use crate::error::{Error, Result};

/// The doubling coherence ladder, signed.
pub const DOUBLING_LADDER: [f64; 11] = [-0.512, -0.256, -0.128, -0.064, -0.032, 0.0, 0.032, 0.064, 0.128, 0.256, 0.512];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub agent: AgentSection,
    pub space: SpaceSection,
    pub evidence: EvidenceSection,
    pub rewards: RewardSection,
    pub task: TaskSection,
    pub stimulus: StimulusSection,
    pub run: RunSection,
    pub warmup: WarmupSection,
    pub protocol: ProtocolSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSection {
    pub epsilon: f64,
    /// `inf` selects the argmax policy.
    pub beta: f64,
    pub gamma: f64,
    pub gamma_terminal: f64,
    /// `accumulate`, `extrema` or `urgency`.
    pub dynamics: String,
    pub urgency_rho: f64,
    /// Outcome-dependent urgency gain; only used with `urgency` dynamics.
    pub pes: bool,
    pub pes_rho_error: f64,
    pub pes_rho_correct: f64,
    /// `constant` or `sigmoid`.
    pub wait_schedule: String,
    pub wait_inf: f64,
    pub wait_lambda: f64,
    pub wait_tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub m: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceSection {
    pub k: f64,
    pub sigma: f64,
    pub dt_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSection {
    pub r_correct: f64,
    pub r_wrong: f64,
    pub r_wait: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    /// Signed coherence levels presented during training.
    pub coherences: Vec<f64>,
    /// Prior weights; empty means uniform.
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StimulusSection {
    pub max_steps: u64,
    pub pulse_onset: u64,
    pub pulse_half: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub u_train: u64,
    pub u_test: u64,
    pub replications: u64,
    pub base_seed: u64,
    /// Completed-trial counts at which Q-tables are captured (0 = initial).
    pub snapshot_trials: Vec<u64>,
    /// Trailing window for terminal-state and behavior estimates.
    pub trailing_window: u64,
    pub bin_size: u64,
    pub smooth_window: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarmupSection {
    pub trials: u64,
    pub steps: u64,
    pub coherence: f64,
    pub r_correct: f64,
    pub r_wrong: f64,
    pub r_wait: f64,
    /// Warm-up tables averaged for the reported post-observation Q-table.
    pub q_replications: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    /// Histogram bin width in lattice steps.
    pub histogram_bin: f64,
    /// `|r_wrong / r_correct|` values; `r_correct` stays fixed.
    pub cbr_values: Vec<f64>,
    pub wait_costs: Vec<f64>,
    pub b_max: f64,
    pub b_step: f64,
    pub epsilons: Vec<f64>,
    pub coherence_sweep: Vec<f64>,
    pub sweep_epsilon: f64,
    pub sweep_trials: u64,
    pub drift_gains: Vec<f64>,
    pub test_coherences: Vec<f64>,
    pub test_sigmas: Vec<f64>,
    pub biased_p_right: f64,
    pub biased_trials: u64,
    pub discard_trials: u64,
    pub analysis_start: u64,
    pub sens_beta: Vec<f64>,
    pub sens_epsilon: Vec<f64>,
    pub sens_gamma: Vec<f64>,
    pub sens_r_correct: Vec<f64>,
    pub sens_r_wrong: Vec<f64>,
    pub sens_r_wait: Vec<f64>,
    pub sens_m: Vec<f64>,
    pub sens_u: Vec<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: "custom".into(),
            agent: AgentSection {
                epsilon: 0.1,
                beta: 50.0,
                gamma: 0.9,
                gamma_terminal: 0.0,
                dynamics: "accumulate".into(),
                urgency_rho: 0.005,
                pes: false,
                pes_rho_error: 0.001,
                pes_rho_correct: 0.003,
                wait_schedule: "constant".into(),
                wait_inf: -1.5,
                wait_lambda: 0.004,
                wait_tau: 600.0,
            },
            space: SpaceSection { m: 100.0, delta: 1.0 },
            evidence: EvidenceSection { k: 0.4, sigma: 1.0, dt_ms: 1.0 },
            rewards: RewardSection { r_correct: 20.0, r_wrong: -50.0, r_wait: -1.0 },
            task: TaskSection { coherences: DOUBLING_LADDER.to_vec(), weights: Vec::new() },
            stimulus: StimulusSection { max_steps: 1000, pulse_onset: 200, pulse_half: 100 },
            run: RunSection {
                u_train: 2400,
                u_test: 0,
                replications: 1,
                base_seed: 1,
                snapshot_trials: Vec::new(),
                trailing_window: 300,
                bin_size: 100,
                smooth_window: 50,
            },
            warmup: WarmupSection {
                trials: 8,
                steps: 300,
                coherence: 0.512,
                r_correct: 100.0,
                r_wrong: -50.0,
                r_wait: -1.0,
                q_replications: 100,
            },
            protocol: ProtocolSection {
                histogram_bin: 1.0,
                cbr_values: log_spaced(0.01, 1e5, 15),
                wait_costs: vec![-1.0, -2.0],
                b_max: 100.0,
                b_step: 0.1,
                epsilons: vec![0.005, 0.01, 0.05, 0.1],
                coherence_sweep: vec![0.016, 0.032, 0.064, 0.128, 0.256, 0.512],
                sweep_epsilon: 0.05,
                sweep_trials: 6000,
                drift_gains: vec![0.4, 1.0, 2.0, 3.0, 4.0, 5.0],
                test_coherences: vec![-0.032, 0.0, 0.032],
                test_sigmas: vec![1.0, 1.3],
                biased_p_right: 0.8,
                biased_trials: 900,
                discard_trials: 300,
                analysis_start: 1200,
                sens_beta: vec![1.0, 5.0, 10.0, 25.0, 50.0, 100.0],
                sens_epsilon: vec![0.02, 0.05, 0.1, 0.2, 0.4],
                sens_gamma: vec![0.5, 0.7, 0.8, 0.9, 0.95, 1.0],
                sens_r_correct: vec![5.0, 10.0, 20.0, 50.0, 100.0],
                sens_r_wrong: vec![-10.0, -25.0, -50.0, -100.0, -200.0],
                sens_r_wait: vec![-0.25, -0.5, -1.0, -2.0, -4.0],
                sens_m: vec![25.0, 50.0, 100.0, 200.0],
                sens_u: vec![300.0, 600.0, 900.0, 1800.0, 3600.0],
            },
        }
    }
}

/// `n` points from `lo` to `hi` in equal logarithmic steps.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| {
            let v = 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64);
            // Trim float noise so echoes stay readable.
            format!("{v:.6e}").parse().unwrap()
        })
        .collect()
}

impl ScenarioConfig {
    pub fn agent_params(&self) -> Result<AgentParams<f64>> {
        let a = &self.agent;
        let dynamics = match a.dynamics.as_str() {
            "accumulate" => Dynamics::Accumulate,
            "extrema" => Dynamics::Extrema,
            "urgency" => Dynamics::Urgency { rho: a.urgency_rho },
            other => {
                return Err(Error::config("agent.dynamics", format!("`{other}` is not one of accumulate, extrema, urgency")))
            }
        };
        let wait_schedule = match a.wait_schedule.as_str() {
            "constant" => WaitSchedule::Constant,
            "sigmoid" => WaitSchedule::Sigmoid { r_inf: a.wait_inf, lambda: a.wait_lambda, tau: a.wait_tau },
            other => {
                return Err(Error::config("agent.wait_schedule", format!("`{other}` is not one of constant, sigmoid")))
            }
        };
        let pes = a.pes.then_some(PesRule { after_error: a.pes_rho_error, after_correct: a.pes_rho_correct });
        let params = AgentParams {
            epsilon: a.epsilon,
            beta: a.beta,
            gamma: a.gamma,
            gamma_terminal: a.gamma_terminal,
            dynamics,
            wait_schedule,
            pes,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn state_space(&self) -> Result<StateSpace<f64>> {
        StateSpace::new(self.space.m, self.space.delta)
    }

    pub fn evidence_params(&self) -> Result<EvidenceParams<f64>> {
        let e = &self.evidence;
        if !e.k.is_finite() {
            return Err(Error::config("evidence.k", "must be finite"));
        }
        EvidenceParams::new(e.k, e.sigma, e.dt_ms)
    }

    pub fn reward_set(&self) -> Result<RewardSet<f64>> {
        let r = &self.rewards;
        RewardSet::new(r.r_correct, r.r_wrong, r.r_wait).map_err(|e| match e {
            Error::Config { reason, .. } => Error::config("rewards", reason),
            other => other,
        })
    }

    pub fn prior(&self) -> Result<CoherencePrior<f64>> {
        prior_from(&self.task.coherences, &self.task.weights).map_err(|e| match e {
            Error::Config { reason, .. } => Error::config("task.coherences", reason),
            other => other,
        })
    }

    pub fn plan(&self) -> StimulusPlan<f64> {
        StimulusPlan::plain(self.stimulus.max_steps as usize)
    }

    pub fn warmup_spec(&self) -> Result<WarmupSpec<f64>> {
        let w = &self.warmup;
        let rewards = RewardSet::new(w.r_correct, w.r_wrong, w.r_wait).map_err(|e| match e {
            Error::Config { reason, .. } => Error::config("warmup", reason),
            other => other,
        })?;
        if !(w.coherence.abs() > 0.0 && w.coherence.abs() <= 1.0) {
            return Err(Error::config("warmup.coherence", "must be nonzero with |c| <= 1"));
        }
        Ok(WarmupSpec { trials: w.trials as usize, steps: w.steps as usize, coherence: w.coherence, rewards })
    }

    /// Range checks for every section. Called after parsing and after
    /// overrides are applied.
    pub fn validate(&self) -> Result<()> {
        self.agent_params()?;
        self.state_space()?;
        self.evidence_params()?;
        self.reward_set()?;
        self.prior()?;
        self.warmup_spec()?;
        let r = &self.run;
        if r.replications == 0 {
            return Err(Error::config("run.replications", "must be >= 1"));
        }
        if r.base_seed > i64::MAX as u64 {
            return Err(Error::config("run.base_seed", "must fit in a signed 64-bit integer"));
        }
        if r.bin_size == 0 {
            return Err(Error::config("run.bin_size", "must be >= 1"));
        }
        if r.smooth_window == 0 {
            return Err(Error::config("run.smooth_window", "must be >= 1"));
        }
        if r.trailing_window == 0 {
            return Err(Error::config("run.trailing_window", "must be >= 1"));
        }
        if self.stimulus.max_steps == 0 {
            return Err(Error::config("stimulus.max_steps", "must be >= 1"));
        }
        let p = &self.protocol;
        if !(p.b_step > 0.0) || !(p.b_max >= 0.0) {
            return Err(Error::config("protocol.b_step", "grid needs b_step > 0 and b_max >= 0"));
        }
        if !(p.histogram_bin > 0.0) {
            return Err(Error::config("protocol.histogram_bin", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&p.biased_p_right) {
            return Err(Error::config("protocol.biased_p_right", "must be in [0, 1]"));
        }
        if !(p.sweep_epsilon > 0.0 && p.sweep_epsilon <= 1.0) {
            return Err(Error::config("protocol.sweep_epsilon", "must be in (0, 1]"));
        }
        Ok(())
    }
}

/// Prior over signed levels; `weights` empty means uniform.
pub fn prior_from(levels: &[f64], weights: &[f64]) -> Result<CoherencePrior<f64>> {
    if weights.is_empty() {
        CoherencePrior::uniform(levels.to_vec())
    } else {
        CoherencePrior::new(levels.to_vec(), weights.to_vec())
    }
}

/// Outcome of merging a partial document onto a base config.
#[derive(Clone, Debug, PartialEq)]
pub struct Merged {
    pub config: ScenarioConfig,
    /// Dotted paths that were absent from the document and took the base value.
    pub applied_defaults: Vec<String>,
}

impl ScenarioConfig {
    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("config serializes to a table")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Merge a partial document onto `self`. Unknown keys and type mismatches
    /// are rejected with their dotted path; the result is range-checked.
    pub fn merge(&self, doc: &toml::Table) -> Result<Merged> {
        let mut base = self.to_table();
        let mut applied = Vec::new();
        merge_table("", &mut base, doc, &type_template().to_table(), &mut applied)?;
        let config: ScenarioConfig = toml::Value::Table(base)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Malformed(e.to_string()))?;
        config.validate()?;
        Ok(Merged { config, applied_defaults: applied })
    }

    /// Set one dotted key, e.g. `agent.epsilon`, with type checking.
    pub fn set(&self, path: &str, value: toml::Value) -> Result<ScenarioConfig> {
        let mut doc = toml::Table::new();
        let mut cursor = &mut doc;
        let parts: Vec<&str> = path.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            if part.is_empty() {
                return Err(Error::config(path, "empty path segment"));
            }
            if i + 1 == parts.len() {
                cursor.insert(part.to_string(), value.clone());
            } else {
                cursor = cursor
                    .entry(part.to_string())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                    .as_table_mut()
                    .expect("fresh table");
            }
        }
        Ok(self.merge(&doc)?.config)
    }

    /// Set a numeric key. `cbr` is a derived key that sets
    /// `rewards.r_wrong = -cbr * rewards.r_correct`.
    pub fn set_number(&self, path: &str, v: f64) -> Result<ScenarioConfig> {
        if path == "cbr" || path == "rewards.cbr" {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(path, "must be a positive finite number"));
            }
            return self.set("rewards.r_wrong", toml::Value::Float(-v * self.rewards.r_correct));
        }
        let value = match lookup(&type_template().to_table(), path) {
            Some(toml::Value::Integer(_)) => {
                if v.fract() != 0.0 || v < 0.0 || v > i64::MAX as f64 {
                    return Err(Error::config(path, format!("{v} is not a non-negative integer")));
                }
                toml::Value::Integer(v as i64)
            }
            Some(toml::Value::Float(_)) => toml::Value::Float(v),
            Some(_) => return Err(Error::config(path, "not a numeric field")),
            None => return Err(Error::config(path, "unknown key")),
        };
        self.set(path, value)
    }
}

fn lookup<'a>(t: &'a toml::Table, path: &str) -> Option<&'a toml::Value> {
    let mut parts = path.split('.');
    let mut v = t.get(parts.next()?)?;
    for p in parts {
        v = v.as_table()?.get(p)?;
    }
    Some(v)
}

/// Default config with every list non-empty, used as the type schema.
fn type_template() -> ScenarioConfig {
    let mut t = ScenarioConfig::default();
    t.task.weights = vec![1.0];
    t.run.snapshot_trials = vec![0];
    t
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn type_name(v: &toml::Value) -> &'static str {
    match v {
        toml::Value::String(_) => "string",
        toml::Value::Integer(_) => "integer",
        toml::Value::Float(_) => "float",
        toml::Value::Boolean(_) => "boolean",
        toml::Value::Datetime(_) => "datetime",
        toml::Value::Array(_) => "array",
        toml::Value::Table(_) => "table",
    }
}

fn coerce(path: &str, schema: &toml::Value, v: &toml::Value) -> Result<toml::Value> {
    use toml::Value as V;
    match (schema, v) {
        (V::Float(_), V::Float(x)) => Ok(V::Float(*x)),
        (V::Float(_), V::Integer(i)) => Ok(V::Float(*i as f64)),
        (V::Integer(_), V::Integer(i)) => {
            if *i < 0 {
                Err(Error::config(path, format!("{i} must be >= 0")))
            } else {
                Ok(V::Integer(*i))
            }
        }
        (V::String(_), V::String(s)) => Ok(V::String(s.clone())),
        (V::Boolean(_), V::Boolean(b)) => Ok(V::Boolean(*b)),
        (V::Array(sa), V::Array(items)) => {
            let elem = sa.first().expect("template arrays are non-empty");
            items
                .iter()
                .enumerate()
                .map(|(i, x)| coerce(&format!("{path}[{i}]"), elem, x))
                .collect::<Result<Vec<_>>>()
                .map(V::Array)
        }
        _ => Err(Error::config(path, format!("expected {}, found {}", type_name(schema), type_name(v)))),
    }
}

fn merge_table(
    prefix: &str,
    base: &mut toml::Table,
    doc: &toml::Table,
    schema: &toml::Table,
    applied: &mut Vec<String>,
) -> Result<()> {
    for (key, v) in doc {
        let path = join(prefix, key);
        let Some(sv) = schema.get(key) else {
            return Err(Error::config(path, "unknown key"));
        };
        match (sv, v) {
            (toml::Value::Table(st), toml::Value::Table(dt)) => {
                let bt = base.get_mut(key).and_then(|b| b.as_table_mut()).expect("base mirrors schema");
                merge_table(&path, bt, dt, st, applied)?;
            }
            (toml::Value::Table(_), other) => {
                return Err(Error::config(path, format!("expected table, found {}", type_name(other))));
            }
            _ => {
                base.insert(key.clone(), coerce(&path, sv, v)?);
            }
        }
    }
    for (key, sv) in schema {
        if !doc.contains_key(key) {
            if let toml::Value::Table(st) = sv {
                let mut leaves = Vec::new();
                collect_leaves(&join(prefix, key), st, &mut leaves);
                applied.extend(leaves);
            } else {
                applied.push(join(prefix, key));
            }
        }
    }
    Ok(())
}

fn collect_leaves(prefix: &str, t: &toml::Table, out: &mut Vec<String>) {
    for (k, v) in t {
        match v {
            toml::Value::Table(st) => collect_leaves(&join(prefix, k), st, out),
            _ => out.push(join(prefix, k)),
        }
    }
}

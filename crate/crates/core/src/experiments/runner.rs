//! Execution of scenario plans: conditions made of consecutive phases, run
//! for a number of seeded replications.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ScenarioConfig;
use super::replicate::replicate;
use crate::agent::{observational_warmup, QTable, Session, TrialEnv, TrialRecord};
use crate::env::{CoherencePrior, EvidenceParams, RewardSet, StimulusPlan};
use crate::error::Result;
use crate::rng::{derive_seed, replication_seed};

const TAG_WARMUP: u64 = 0x7761_726d;

/// Initial Q-table of a session.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    Blank,
    /// Observational warm-up described by the `[warmup]` section.
    Warmup,
}

/// A block of consecutive trials sharing task settings.
#[derive(Clone, Debug)]
pub struct Phase {
    pub name: String,
    pub trials: u64,
    /// `false` freezes the Q-table (epsilon = 0).
    pub learning: bool,
    pub prior: CoherencePrior<f64>,
    pub evidence: EvidenceParams<f64>,
    pub plan: StimulusPlan<f64>,
    pub rewards: RewardSet<f64>,
}

impl Phase {
    /// A learning phase with the config's own task settings.
    pub fn train(cfg: &ScenarioConfig, trials: u64) -> Result<Self> {
        Ok(Self {
            name: "train".into(),
            trials,
            learning: true,
            prior: cfg.prior()?,
            evidence: cfg.evidence_params()?,
            plan: cfg.plan(),
            rewards: cfg.reward_set()?,
        })
    }

    /// A frozen phase with the config's own task settings.
    pub fn test(cfg: &ScenarioConfig, trials: u64) -> Result<Self> {
        Ok(Self { name: "test".into(), learning: false, ..Self::train(cfg, trials)? })
    }
}

/// One arm of a scenario. Every condition runs the same replication seeds.
#[derive(Clone, Debug)]
pub struct Condition {
    pub label: String,
    /// Swept parameter and its value, when the condition is a sweep point.
    pub sweep: Option<(String, f64)>,
    pub config: ScenarioConfig,
    pub init: Init,
    pub phases: Vec<Phase>,
}

impl Condition {
    pub fn new(label: impl Into<String>, config: ScenarioConfig, phases: Vec<Phase>) -> Self {
        Self { label: label.into(), sweep: None, config, init: Init::Blank, phases }
    }

    pub fn swept(mut self, param: impl Into<String>, value: f64) -> Self {
        self.sweep = Some((param.into(), value));
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn total_trials(&self) -> u64 {
        self.phases.iter().map(|p| p.trials).sum()
    }

    /// Trial index range of the named phase.
    pub fn phase_range(&self, name: &str) -> Option<Range<usize>> {
        let mut start = 0usize;
        for p in &self.phases {
            let end = start + p.trials as usize;
            if p.name == name {
                return Some(start..end);
            }
            start = end;
        }
        None
    }
}

/// Output of one (condition, replication) session.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub condition: String,
    pub rep: u64,
    pub seed: u64,
    pub records: Vec<TrialRecord<f64>>,
    /// `(completed trials, table)` in capture order.
    pub snapshots: Vec<(u64, QTable<f64>)>,
}

impl RunRecord {
    /// Records of the phase occupying `range`, clipped to what exists.
    pub fn slice(&self, range: Range<usize>) -> &[TrialRecord<f64>] {
        let end = range.end.min(self.records.len());
        &self.records[range.start.min(end)..end]
    }

    pub fn snapshot(&self, trial: u64) -> Option<&QTable<f64>> {
        self.snapshots.iter().find(|(t, _)| *t == trial).map(|(_, q)| q)
    }
}

/// All sessions of a scenario, ordered by condition then replication.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunData {
    pub runs: Vec<RunRecord>,
}

impl RunData {
    pub fn condition<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.runs.iter().filter(move |r| r.condition == label)
    }
}

/// Run one session for `cond` seeded with `seed`.
pub fn run_condition(cond: &Condition, seed: u64) -> Result<(Vec<TrialRecord<f64>>, Vec<(u64, QTable<f64>)>)> {
    let cfg = &cond.config;
    let params = cfg.agent_params()?;
    let frozen = params.frozen();
    let space = cfg.state_space()?;
    let initial = match cond.init {
        Init::Blank => QTable::zeros(space),
        Init::Warmup => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[TAG_WARMUP]));
            observational_warmup(&cfg.warmup_spec()?, &params, space, &cfg.evidence_params()?, &mut rng)?
        }
    };
    let mut session = Session::with_table(initial, seed);
    let mut snapshots = Vec::new();
    let mut records = Vec::with_capacity(cond.total_trials() as usize);
    for phase in &cond.phases {
        let env = TrialEnv {
            params: if phase.learning { &params } else { &frozen },
            evidence: &phase.evidence,
            plan: &phase.plan,
            rewards: &phase.rewards,
        };
        records.extend(session.run_block(phase.trials, &phase.prior, &env, &cfg.run.snapshot_trials, &mut snapshots)?);
    }
    Ok((records, snapshots))
}

/// Run every condition for `replications` seeds derived from `base_seed`.
/// Sessions run in parallel; the output order is fixed.
pub fn execute(conditions: &[Condition], replications: u64, base_seed: u64) -> Result<RunData> {
    let jobs: Vec<(usize, u64)> =
        (0..conditions.len()).flat_map(|c| (0..replications).map(move |r| (c, r))).collect();
    let results = replicate(jobs.len() as u64, |i| {
        let (c, rep) = jobs[i as usize];
        let seed = replication_seed(base_seed, rep);
        run_condition(&conditions[c], seed).map(|(records, snapshots)| RunRecord {
            condition: conditions[c].label.clone(),
            rep,
            seed,
            records,
            snapshots,
        })
    });
    Ok(RunData { runs: results.into_iter().collect::<Result<Vec<_>>>()? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.run.snapshot_trials = vec![0, 20];
        cfg
    }

    #[test]
    fn phases_are_contiguous() {
        let cfg = small_cfg();
        let cond = Condition::new("a", cfg.clone(), vec![Phase::train(&cfg, 30).unwrap(), Phase::test(&cfg, 10).unwrap()]);
        assert_eq!(cond.phase_range("train"), Some(0..30));
        assert_eq!(cond.phase_range("test"), Some(30..40));
        let data = execute(&[cond], 2, 5).unwrap();
        assert_eq!(data.runs.len(), 2);
        let run = &data.runs[0];
        assert_eq!(run.records.len(), 40);
        assert!(run.records.iter().enumerate().all(|(i, r)| r.trial == i as u64));
        assert_eq!(run.snapshots.iter().map(|s| s.0).collect::<Vec<_>>(), vec![0, 20]);
        assert!(run.snapshot(0).unwrap().rows().all(|(_, row)| row == [0.0; 3]));
    }

    #[test]
    fn frozen_phase_leaves_table_unchanged() {
        let mut cfg = small_cfg();
        cfg.run.snapshot_trials = vec![30, 40];
        let cond = Condition::new("a", cfg.clone(), vec![Phase::train(&cfg, 30).unwrap(), Phase::test(&cfg, 10).unwrap()]);
        let data = execute(&[cond], 1, 9).unwrap();
        assert_eq!(data.runs[0].snapshot(30), data.runs[0].snapshot(40));
    }

    #[test]
    fn conditions_share_replication_seeds() {
        let cfg = small_cfg();
        let a = Condition::new("a", cfg.clone(), vec![Phase::train(&cfg, 15).unwrap()]);
        let b = Condition::new("b", cfg.clone(), vec![Phase::train(&cfg, 15).unwrap()]);
        let data = execute(&[a, b], 3, 11).unwrap();
        for rep in 0..3 {
            let ra = data.runs.iter().find(|r| r.condition == "a" && r.rep == rep).unwrap();
            let rb = data.runs.iter().find(|r| r.condition == "b" && r.rep == rep).unwrap();
            assert_eq!(ra.seed, rb.seed);
            assert_eq!(ra.records, rb.records);
        }
    }
}

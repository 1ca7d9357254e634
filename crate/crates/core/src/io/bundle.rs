//! Output bundles: everything one run produced, in a directory.
//!
//! ```text
//! config.toml                       full config echo
//! metadata.json                     seed, version, overrides, file manifest
//! trials/<cond>_rep000.csv          one trial log per session
//! snapshots/<cond>_rep000_t00400.csv
//! tables/<name>.csv                 mean Q-tables kept by the summary
//! summary.json
//! ```
//!
//! Sweeps write `sweep.csv` plus one bundle per point under `points/`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::tables::{read_snapshot, read_trials, write_snapshot, write_sweep, write_trials};
use crate::error::{Error, Result};
use crate::experiments::{plan, summarize, Condition, RunData, RunRecord, ScenarioConfig, ScenarioRun, Summary, SweepResult};
use crate::io::config::parse_config;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// What the caller knows about how a config was built.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub overrides: Vec<String>,
    pub applied_defaults: Vec<String>,
    /// Seconds since the Unix epoch; `None` keeps bundles byte-stable.
    pub timestamp: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub trial: u64,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub condition: String,
    pub rep: u64,
    pub seed: u64,
    pub trials: String,
    pub snapshots: Vec<SnapshotEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub name: String,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub base_seed: u64,
    pub replications: u64,
    pub overrides: Vec<String>,
    pub applied_defaults: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    pub runs: Vec<RunEntry>,
    pub tables: Vec<TableEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPointEntry {
    pub value: f64,
    pub dir: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub base_seed: u64,
    pub param: String,
    pub overrides: Vec<String>,
    pub applied_defaults: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    pub points: Vec<SweepPointEntry>,
}

/// Write `path` through a temporary sibling and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let name = path.file_name().ok_or_else(|| Error::config(path.display().to_string(), "not a file path"))?;
    let tmp = parent.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// File-name form of a condition label.
pub fn file_stem(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || "._=+-".contains(c) { c } else { '_' }).collect()
}

/// The summary document stored as `summary.json`.
pub fn render_summary(summary: &Summary) -> Result<String> {
    let doc = json!({
        "report": summary.report,
        "failures": summary.failures,
        "tables": summary.tables.iter().map(|(n, _)| n).collect::<Vec<_>>(),
    });
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Internal(format!("summary json: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn to_json<T: Serialize>(x: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(x).map_err(|e| Error::Internal(format!("metadata json: {e}")))?;
    v.push(b'\n');
    Ok(v)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Write a scenario run to `dir`.
pub fn write_bundle(dir: &Path, run: &ScenarioRun, prov: &Provenance) -> Result<()> {
    let mut stems = std::collections::BTreeMap::new();
    for c in &run.conditions {
        if let Some(other) = stems.insert(file_stem(&c.label), c.label.clone()) {
            return Err(Error::Internal(format!("conditions `{other}` and `{}` share a file name", c.label)));
        }
    }
    let mut runs = Vec::new();
    for r in &run.data.runs {
        let cond = condition(&run.conditions, &r.condition)?;
        let stem = format!("{}_rep{:03}", file_stem(&r.condition), r.rep);
        let trials = format!("trials/{stem}.csv");
        let dt = cond.config.evidence.dt_ms;
        write_atomic(&dir.join(&trials), &csv_bytes(|b| write_trials(b, &r.records, dt))?)?;
        let mut snapshots = Vec::new();
        for (t, q) in &r.snapshots {
            let file = format!("snapshots/{stem}_t{t:05}.csv");
            write_atomic(&dir.join(&file), &csv_bytes(|b| write_snapshot(b, q))?)?;
            snapshots.push(SnapshotEntry { trial: *t, file });
        }
        runs.push(RunEntry { condition: r.condition.clone(), rep: r.rep, seed: r.seed, trials, snapshots });
    }
    let mut tables = Vec::new();
    for (name, q) in &run.summary.tables {
        let file = format!("tables/{}.csv", file_stem(name));
        write_atomic(&dir.join(&file), &csv_bytes(|b| write_snapshot(b, q))?)?;
        tables.push(TableEntry { name: name.clone(), file });
    }
    let meta = Metadata {
        tool: "qwait".into(),
        version: VERSION.into(),
        scenario: run.config.scenario.clone(),
        base_seed: run.config.run.base_seed,
        replications: run.config.run.replications,
        overrides: prov.overrides.clone(),
        applied_defaults: prov.applied_defaults.clone(),
        timestamp_unix: prov.timestamp,
        runs,
        tables,
    };
    write_atomic(&dir.join("config.toml"), run.config.to_toml().as_bytes())?;
    write_atomic(&dir.join("summary.json"), render_summary(&run.summary)?.as_bytes())?;
    write_atomic(&dir.join("metadata.json"), &to_json(&meta)?)
}

fn condition<'a>(conds: &'a [Condition], label: &str) -> Result<&'a Condition> {
    conds
        .iter()
        .find(|c| c.label == label)
        .ok_or_else(|| Error::Internal(format!("no condition labelled `{label}`")))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::io(path, e))
}

/// A bundle loaded back from disk, with the plan rebuilt from its config.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub dir: PathBuf,
    pub config: ScenarioConfig,
    pub metadata: Metadata,
    pub conditions: Vec<Condition>,
    pub data: RunData,
    pub stored_summary: String,
}

pub fn read_bundle(dir: &Path) -> Result<Bundle> {
    let bundle_err = |reason: String| Error::Bundle { path: dir.to_path_buf(), reason };
    let config = parse_config(&read_text(&dir.join("config.toml"))?)?.config;
    let metadata: Metadata = serde_json::from_str(&read_text(&dir.join("metadata.json"))?)
        .map_err(|e| bundle_err(format!("metadata.json: {e}")))?;
    if metadata.scenario != config.scenario {
        return Err(bundle_err(format!("metadata names `{}`, config `{}`", metadata.scenario, config.scenario)));
    }
    let conditions = plan(&config)?;
    let mut runs = Vec::with_capacity(metadata.runs.len());
    for entry in &metadata.runs {
        let cond = condition(&conditions, &entry.condition).map_err(|e| bundle_err(e.to_string()))?;
        let space = cond.config.state_space()?;
        let path = dir.join(&entry.trials);
        let records = read_trials(open(&path)?, &space, cond.config.evidence.dt_ms)
            .map_err(|e| bundle_err(format!("{}: {e}", entry.trials)))?;
        let mut snapshots = Vec::with_capacity(entry.snapshots.len());
        for s in &entry.snapshots {
            let q = read_snapshot(open(&dir.join(&s.file))?, space).map_err(|e| bundle_err(format!("{}: {e}", s.file)))?;
            snapshots.push((s.trial, q));
        }
        runs.push(RunRecord { condition: entry.condition.clone(), rep: entry.rep, seed: entry.seed, records, snapshots });
    }
    let stored_summary = read_text(&dir.join("summary.json"))?;
    Ok(Bundle { dir: dir.to_path_buf(), config, metadata, conditions, data: RunData { runs }, stored_summary })
}

/// Summary re-derived from a bundle's stored trials and snapshots.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub summary: Summary,
    pub rendered: String,
    pub stored: String,
}

impl Analysis {
    pub fn matches(&self) -> bool {
        self.rendered == self.stored
    }
}

pub fn analyze(dir: &Path) -> Result<Analysis> {
    let b = read_bundle(dir)?;
    let summary = summarize(&b.config, &b.conditions, &b.data)?;
    let rendered = render_summary(&summary)?;
    Ok(Analysis { summary, rendered, stored: b.stored_summary })
}

/// Write a sweep: base config, long-format `sweep.csv`, and a full bundle
/// per point.
pub fn write_sweep_bundle(dir: &Path, base: &ScenarioConfig, result: &SweepResult, prov: &Provenance) -> Result<()> {
    let mut points = Vec::new();
    for (i, (value, run)) in result.runs.iter().enumerate() {
        let sub = format!("points/{i:02}");
        let mut p = prov.clone();
        p.overrides.push(format!("{}={value}", result.param));
        write_bundle(&dir.join(&sub), run, &p)?;
        points.push(SweepPointEntry { value: *value, dir: sub });
    }
    let meta = SweepMetadata {
        tool: "qwait".into(),
        version: VERSION.into(),
        scenario: base.scenario.clone(),
        base_seed: base.run.base_seed,
        param: result.param.clone(),
        overrides: prov.overrides.clone(),
        applied_defaults: prov.applied_defaults.clone(),
        timestamp_unix: prov.timestamp,
        points,
    };
    write_atomic(&dir.join("config.toml"), base.to_toml().as_bytes())?;
    write_atomic(&dir.join("sweep.csv"), &csv_bytes(|b| write_sweep(b, &result.param, &result.rows))?)?;
    write_atomic(&dir.join("metadata.json"), &to_json(&meta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_scenario, scenario_defaults};

    fn small(name: &str) -> ScenarioConfig {
        let mut cfg = scenario_defaults(name).unwrap();
        cfg.run.u_train = 120;
        cfg.run.replications = 2;
        cfg
    }

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.txt");
        write_atomic(&p, b"x").unwrap();
        write_atomic(&p, b"yz").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"yz");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn failed_write_keeps_old_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.txt");
        write_atomic(&p, b"old").unwrap();
        // A directory where the temp file should go makes the write fail.
        fs::create_dir(dir.path().join(".f.txt.tmp")).unwrap();
        assert!(write_atomic(&p, b"new").is_err());
        assert_eq!(fs::read(&p).unwrap(), b"old");
    }

    #[test]
    fn file_stems_are_path_safe() {
        assert_eq!(file_stem("accumulate:k=0.4"), "accumulate_k=0.4");
        assert_eq!(file_stem("a/b c"), "a_b_c");
    }

    #[test]
    fn bundle_round_trips_and_reanalyzes() {
        let mut cfg = small("baseline-training");
        cfg.run.snapshot_trials = vec![0, 60, 120];
        let run = run_scenario(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(dir.path(), &run, &Provenance::default()).unwrap();
        let b = read_bundle(dir.path()).unwrap();
        assert_eq!(b.config, cfg);
        assert_eq!(b.data, run.data);
        let a = analyze(dir.path()).unwrap();
        assert!(a.matches());
        assert_eq!(a.summary, run.summary);
    }

    #[test]
    fn same_seed_gives_identical_bundles() {
        let cfg = small("extrema-vs-accumulation");
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for d in [&d1, &d2] {
            write_bundle(d.path(), &run_scenario(&cfg).unwrap(), &Provenance::default()).unwrap();
        }
        let files = |d: &Path| {
            let mut v: Vec<(PathBuf, Vec<u8>)> = walk(d).into_iter().map(|p| (p.strip_prefix(d).unwrap().to_path_buf(), fs::read(&p).unwrap())).collect();
            v.sort();
            v
        };
        let (f1, f2) = (files(d1.path()), files(d2.path()));
        assert!(f1.len() > 4);
        assert_eq!(f1, f2);
    }

    fn walk(d: &Path) -> Vec<PathBuf> {
        let mut out = Vec::new();
        for e in fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                out.extend(walk(&p));
            } else {
                out.push(p);
            }
        }
        out
    }

    #[test]
    fn tampered_trials_change_the_analysis() {
        let run = run_scenario(&small("baseline-training")).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(dir.path(), &run, &Provenance::default()).unwrap();
        let p = dir.path().join("trials/train_rep000.csv");
        let text = fs::read_to_string(&p).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines.truncate(lines.len() - 50);
        fs::write(&p, lines.join("\n") + "\n").unwrap();
        assert!(!analyze(dir.path()).unwrap().matches());
    }

    #[test]
    fn sweep_bundle_layout() {
        let cfg = small("baseline-training");
        let result = crate::experiments::sweep(&cfg, "agent.epsilon", &[0.1, 0.2]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_sweep_bundle(dir.path(), &cfg, &result, &Provenance::default()).unwrap();
        let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + result.rows.len());
        assert!(analyze(&dir.path().join("points/01")).unwrap().matches());
        let meta: SweepMetadata = serde_json::from_slice(&fs::read(dir.path().join("metadata.json")).unwrap()).unwrap();
        assert_eq!(meta.points.len(), 2);
    }
}

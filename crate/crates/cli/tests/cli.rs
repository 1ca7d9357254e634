use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qwait(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwait")).args(args).env_remove("QWAIT_OUT").output().expect("spawn qwait")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn list_prints_the_registry() {
    let o = qwait(&["list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["toy-oracle", "baseline-training", "optimality-fine", "param-sensitivity"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn unknown_scenario_exits_2_with_the_list() {
    let o = qwait(&["run", "nosuch"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("baseline-training"));
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(code(&qwait(&["frobnicate"])), 2);
    assert_eq!(code(&qwait(&["run", "toy-oracle", "--set", "agent.epsilon"])), 2);
    let o = qwait(&["run", "sat-cbr", "--set", "agent.epsilon=-0.1", "--no-timestamp"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("agent.epsilon"));
    assert_eq!(code(&qwait(&["run", "sat-cbr", "--set", "agent.nope=1"])), 2);
    assert_eq!(code(&qwait(&["sweep", "sat-cbr", "--param", "agent.epsilon", "--values", "0.2,0.1,0.3"])), 2);
    assert_eq!(code(&qwait(&["analyze", "/nonexistent/bundle"])), 2);
}

#[test]
fn oracle_passes() {
    let o = qwait(&["oracle"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8(o.stdout).unwrap().contains("FAIL"));
}

#[test]
fn same_seed_runs_are_byte_identical_and_reanalyze() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = qwait(&["run", "toy-oracle", "--seed", "11", "--no-timestamp", "--out", d.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (fa, fb) = (files(&a), files(&b));
    assert!(fa.iter().any(|(p, _)| p.starts_with("trials")));
    assert_eq!(fa, fb);
    let meta = fs::read_to_string(a.join("metadata.json")).unwrap();
    assert!(meta.contains("\"base_seed\": 11") && !meta.contains("timestamp"));
    assert_eq!(code(&qwait(&["analyze", a.to_str().unwrap()])), 0);
}

#[test]
fn timestamp_is_recorded_by_default() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qwait(&["run", "toy-oracle", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(tmp.path().join("metadata.json")).unwrap().contains("timestamp_unix"));
}

#[test]
fn psychometrics_summary_and_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("psy");
    let o = qwait(&["run", "trained-psychometrics", "--no-timestamp", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("summary.json")).unwrap()).unwrap();
    let details = &summary["report"]["details"];
    assert!(details["b_mean"].as_f64().unwrap() > 0.0);
    assert_eq!(details["rows"].as_array().unwrap().len(), 6);

    let o = qwait(&["analyze", dir.to_str().unwrap(), "--print"]);
    assert_eq!(code(&o), 0);
    assert_eq!(o.stdout, fs::read(dir.join("summary.json")).unwrap());

    let trials = dir.join("trials/trained_rep000.csv");
    let text = fs::read_to_string(&trials).unwrap();
    let kept: Vec<&str> = text.lines().take(text.lines().count() - 100).collect();
    fs::write(&trials, kept.join("\n") + "\n").unwrap();
    assert_eq!(code(&qwait(&["analyze", dir.to_str().unwrap()])), 1);
}

#[test]
fn default_output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qwait"))
        .args(["run", "toy-oracle", "--no-timestamp"])
        .env("QWAIT_OUT", tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(tmp.path().join("toy-oracle/summary.json").is_file());
}

#[test]
fn sweep_writes_table_and_point_bundles() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sw");
    let o = qwait(&[
        "sweep", "baseline-training", "--param", "cbr", "--values", "0.5,2", "--set", "run.u_train=100",
        "--set", "run.replications=2", "--set", "run.snapshot_trials=[]", "--no-timestamp", "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "param,value,condition,metric,mean,std,sem,n");
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    assert!(fs::read_to_string(dir.join("points/01/config.toml")).unwrap().contains("r_wrong = -40.0"));
    assert_eq!(code(&qwait(&["analyze", dir.join("points/00").to_str().unwrap()])), 0);
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use qwait::experiments::{registry, run_scenario, self_checks, sweep, ScenarioConfig, ScenarioRun};
use qwait::io::bundle::file_stem;
use qwait::io::{analyze, apply_overrides, parse_scenario_config, write_bundle, write_sweep_bundle, Provenance};
use qwait::Error;

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "QWAIT_OUT";

#[derive(Parser)]
#[command(name = "qwait", version, about = "Simulate a Q-learning agent that can wait for more evidence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its bundle.
    Run {
        scenario: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a scenario once per value of one parameter.
    Sweep {
        scenario: String,
        /// Dotted config key, or `cbr`.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// List the registered scenarios.
    List,
    /// Re-derive a bundle's summary from its stored trials and compare.
    Analyze {
        bundle: PathBuf,
        /// Print the re-derived summary document.
        #[arg(long)]
        print: bool,
    },
    /// Run the toy-model and closed-form self-checks.
    Oracle,
}

#[derive(Args)]
struct RunOpts {
    /// TOML file with config overrides for the scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set agent.epsilon=0.05`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Base seed; replication seeds derive from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Bundle directory. Defaults to a subdirectory of $QWAIT_OUT or ./qwait-out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the timestamp so identical runs give identical bundles.
    #[arg(long)]
    no_timestamp: bool,
}

enum Failure {
    Check(String),
    Usage(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, opts } => cmd_run(&scenario, &opts),
        Command::Sweep { scenario, param, values, opts } => cmd_sweep(&scenario, &param, &values, &opts),
        Command::List => {
            print_registry();
            Ok(())
        }
        Command::Analyze { bundle, print } => cmd_analyze(&bundle, print),
        Command::Oracle => cmd_oracle(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            if matches!(e, Error::UnknownScenario { .. }) {
                eprintln!();
                print_registry_to_stderr();
            }
            ExitCode::from(2)
        }
    }
}

fn registry_lines() -> Vec<String> {
    let width = registry().iter().map(|s| s.name.len()).max().unwrap_or(0);
    registry().iter().map(|s| format!("{:width$}  {}", s.name, s.figure)).collect()
}

fn print_registry() {
    for l in registry_lines() {
        println!("{l}");
    }
}

fn print_registry_to_stderr() {
    for l in registry_lines() {
        eprintln!("{l}");
    }
}

fn build_config(scenario: &str, opts: &RunOpts) -> Result<(ScenarioConfig, Provenance), Error> {
    let text = match &opts.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
        None => None,
    };
    let merged = parse_scenario_config(scenario, text.as_deref())?;
    let mut overrides = opts.set.clone();
    if let Some(seed) = opts.seed {
        overrides.push(format!("run.base_seed={seed}"));
    }
    let cfg = apply_overrides(&merged.config, &overrides)?;
    let timestamp = if opts.no_timestamp {
        None
    } else {
        SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
    };
    Ok((cfg, Provenance { overrides, applied_defaults: merged.applied_defaults, timestamp }))
}

fn out_dir(opts: &RunOpts, name: &str) -> PathBuf {
    match &opts.out {
        Some(p) => p.clone(),
        None => std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("qwait-out")).join(name),
    }
}

fn print_metrics(run: &ScenarioRun) {
    println!("{:<28} {:>16} {:>16} {:>18}", "condition", "terminal state", "accuracy", "mean RT (ms)");
    let metrics = run.summary.report.get("conditions").and_then(|v| v.as_array()).cloned().unwrap_or_default();
    for m in metrics {
        let agg = |k: &str| {
            let a = &m[k];
            format!("{:.3} +- {:.3}", a["mean"].as_f64().unwrap_or(f64::NAN), a["sem"].as_f64().unwrap_or(f64::NAN))
        };
        println!(
            "{:<28} {:>16} {:>16} {:>18}",
            m["label"].as_str().unwrap_or(""),
            agg("terminal_state"),
            agg("accuracy"),
            agg("mean_rt_ms")
        );
    }
}

fn cmd_run(scenario: &str, opts: &RunOpts) -> Result<(), Failure> {
    let (cfg, prov) = build_config(scenario, opts)?;
    let run = run_scenario(&cfg)?;
    let dir = out_dir(opts, &cfg.scenario);
    write_bundle(&dir, &run, &prov)?;
    print_metrics(&run);
    println!("bundle written to {}", dir.display());
    if run.summary.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(run.summary.failures.join("; ")))
    }
}

fn cmd_sweep(scenario: &str, param: &str, values: &[f64], opts: &RunOpts) -> Result<(), Failure> {
    let (cfg, prov) = build_config(scenario, opts)?;
    let result = sweep(&cfg, param, values)?;
    let dir = out_dir(opts, &format!("{}-sweep-{}", cfg.scenario, file_stem(param)));
    write_sweep_bundle(&dir, &cfg, &result, &prov)?;
    println!("{:>12} {:<28} {:<16} {:>12} {:>12}", param, "condition", "metric", "mean", "sem");
    for r in &result.rows {
        println!("{:>12} {:<28} {:<16} {:>12.4} {:>12.4}", r.value, r.condition, r.metric, r.mean, r.sem);
    }
    println!("sweep written to {}", dir.display());
    let failures: Vec<String> = result.runs.iter().flat_map(|(_, r)| r.summary.failures.clone()).collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failures.join("; ")))
    }
}

fn cmd_analyze(bundle: &Path, print: bool) -> Result<(), Failure> {
    let a = analyze(bundle)?;
    if print {
        print!("{}", a.rendered);
    }
    if a.matches() {
        eprintln!("summary.json reproduced exactly");
        Ok(())
    } else {
        Err(Failure::Check(format!("re-derived summary differs from {}", bundle.join("summary.json").display())))
    }
}

fn cmd_oracle() -> Result<(), Failure> {
    let checks = self_checks();
    for c in &checks {
        println!("{} {:<32} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}

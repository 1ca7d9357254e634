//! Self-checks with known answers: the toy-model replay and the closed-form
//! reference values.

use serde::Serialize;

use super::registry::{run_scenario, scenario_defaults};
use crate::agent::softmax_probabilities;
use crate::analysis::closed_form::{accuracy_closed_form, optimal_terminal_state, rt_closed_form, BGrid};
use crate::analysis::weibull::{weibull_accuracy, weibull_fit_points};
use crate::env::RewardSet;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, got: f64, want: f64, tol: f64) -> OracleCheck {
    OracleCheck { name, passed: (got - want).abs() <= tol, detail: format!("got {got}, expected {want} +- {tol:e}") }
}

pub fn self_checks() -> Vec<OracleCheck> {
    let mut out = Vec::new();

    out.push(match scenario_defaults("toy-oracle").and_then(|c| run_scenario(&c)) {
        Ok(run) if run.summary.failures.is_empty() => {
            OracleCheck { name: "toy-model replay", passed: true, detail: format!("{} sessions match", run.config.run.replications) }
        }
        Ok(run) => OracleCheck { name: "toy-model replay", passed: false, detail: run.summary.failures.join("; ") },
        Err(e) => OracleCheck { name: "toy-model replay", passed: false, detail: e.to_string() },
    });

    let p = softmax_probabilities([0.1, 0.0, 0.0], 50.0)[0];
    out.push(check("softmax beta=50", p, 5f64.exp() / (5f64.exp() + 2.0), 1e-12));

    let (k, b, c) = (0.4, 20.0, 0.064);
    out.push(check("accuracy closed form", accuracy_closed_form(c, b, k), 1.0 / (1.0 + (-1.024f64).exp()), 1e-12));
    out.push(check("RT closed form", rt_closed_form(c, b, k), 368.36, 0.01));
    out.push(check("RT closed form at c=0", rt_closed_form(1e-12, b, k), b * b, 1e-9));

    out.push(match RewardSet::new(500.0, -1200.0, -1.0)
        .and_then(|r| optimal_terminal_state(k, c, &r, &BGrid { b_max: 100.0, b_step: 0.1 }))
    {
        Ok((b_star, _)) => check("grid-search b_star", b_star, 10.6, 1e-9),
        Err(e) => OracleCheck { name: "grid-search b_star", passed: false, detail: e.to_string() },
    });

    let levels = [0.0, 0.032, 0.064, 0.128, 0.256, 0.512];
    let pts: Vec<(f64, f64, f64)> = levels.iter().map(|&c| (c, weibull_accuracy(c, 0.1, 1.5, 0.02), 100.0)).collect();
    out.push(match weibull_fit_points(&pts).fitted() {
        Some(f) => {
            let err = (f.alpha - 0.1).abs().max((f.slope - 1.5).abs()).max((f.lapse - 0.02).abs());
            check("Weibull round trip", err, 0.0, 1e-6)
        }
        None => OracleCheck { name: "Weibull round trip", passed: false, detail: "fit failed".into() },
    });

    let logistic: Vec<(f64, f64, f64)> = (0..=64).map(|i| i as f64 * 0.008).map(|c| (c, accuracy_closed_form(c, b, k), 1.0)).collect();
    let inversion = (0.82f64 / 0.18).ln() / (2.0 * k * b);
    out.push(match weibull_fit_points(&logistic).fitted().and_then(|f| f.threshold82) {
        Some(t) => check("82% threshold of logistic data", t, inversion, 0.005),
        None => OracleCheck { name: "82% threshold of logistic data", passed: false, detail: "no threshold".into() },
    });

    out
}

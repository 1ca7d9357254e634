use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// State update rule applied after each Wait.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dynamics<T> {
    /// `s' = quantize(s + E)`.
    Accumulate,
    /// `s' = quantize(E)`, memoryless.
    Extrema,
    /// `s' = quantize(s + E + sgn(E) rho t)`.
    Urgency { rho: T },
}

/// Cost of one Wait as a function of the trial index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WaitSchedule<T> {
    Constant,
    /// `r_inf / (1 + exp(lambda (tau - u)))`.
    Sigmoid { r_inf: T, lambda: T, tau: T },
}

/// Outcome-dependent urgency gain (post-error slowing).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PesRule<T> {
    pub after_error: T,
    pub after_correct: T,
}

impl Default for PesRule<f64> {
    fn default() -> Self {
        Self { after_error: 0.001, after_correct: 0.003 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentParams<T> {
    /// Learning rate.
    pub epsilon: T,
    /// Softmax inverse temperature; `+inf` selects the argmax.
    pub beta: T,
    /// Discount applied to Wait transitions.
    pub gamma: T,
    /// Discount applied when the trial terminates.
    pub gamma_terminal: T,
    pub dynamics: Dynamics<T>,
    pub wait_schedule: WaitSchedule<T>,
    pub pes: Option<PesRule<T>>,
}

impl Default for AgentParams<f64> {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            beta: 50.0,
            gamma: 0.9,
            gamma_terminal: 0.0,
            dynamics: Dynamics::Accumulate,
            wait_schedule: WaitSchedule::Constant,
            pes: None,
        }
    }
}

impl<T: Scalar> AgentParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero() && self.epsilon <= T::one()) {
            return Err(Error::config("agent.epsilon", format!("{} is outside (0, 1]", self.epsilon)));
        }
        if self.beta.is_nan() || self.beta < T::zero() {
            return Err(Error::config("agent.beta", format!("{} must be >= 0", self.beta)));
        }
        for (path, g) in [("agent.gamma", self.gamma), ("agent.gamma_terminal", self.gamma_terminal)] {
            if !(g >= T::zero() && g <= T::one()) {
                return Err(Error::config(path, format!("{g} is outside [0, 1]")));
            }
        }
        if let Dynamics::Urgency { rho } = self.dynamics {
            if !(rho >= T::zero()) || !rho.is_finite() {
                return Err(Error::config("agent.urgency_rho", "must be >= 0"));
            }
        }
        if let Some(p) = self.pes {
            if !(p.after_error >= T::zero() && p.after_correct >= T::zero()) {
                return Err(Error::config("agent.pes_rho_error", "PES gains must be >= 0"));
            }
        }
        Ok(())
    }

    /// Same agent with learning switched off (test phases).
    pub fn frozen(&self) -> Self {
        Self { epsilon: T::zero(), ..*self }
    }
}

/// Wait cost in trial `u`.
pub fn wait_cost_at<T: Scalar>(u: u64, schedule: &WaitSchedule<T>, r_wait: T) -> T {
    match *schedule {
        WaitSchedule::Constant => r_wait,
        WaitSchedule::Sigmoid { r_inf, lambda, tau } => {
            r_inf / (T::one() + (lambda * (tau - T::lit(u as f64))).exp())
        }
    }
}

/// `e + sgn(e) rho t`, with `sgn(0) = 0`.
pub fn urgency_evidence<T: Scalar>(e: T, t: usize, rho: T) -> T {
    let sign = if e > T::zero() {
        T::one()
    } else if e < T::zero() {
        -T::one()
    } else {
        T::zero()
    };
    e + sign * rho * T::lit(t as f64)
}

/// Urgency gain for the next trial given the previous terminal reward.
/// With no previous trial the after-correct gain is used; rewards in
/// `[-1, 0]` cannot index the rule (only terminal rewards reach it) and
/// also map to the after-correct gain.
pub fn pes_rho<T: Scalar>(prev_reward: Option<T>, rule: &PesRule<T>) -> T {
    match prev_reward {
        Some(r) if r < -T::one() => rule.after_error,
        _ => rule.after_correct,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_wait_cost() {
        let s = WaitSchedule::Sigmoid { r_inf: -1.5, lambda: 0.004, tau: 600.0 };
        let w0: f64 = wait_cost_at(0, &s, -1.0);
        assert!((w0 - (-0.12476)).abs() < 1e-4, "{w0}");
        assert!((w0 - (-0.12)).abs() < 0.005);
        assert!((wait_cost_at::<f64>(600, &s, -1.0) + 0.75).abs() < 1e-12);
        assert!((wait_cost_at::<f64>(100_000, &s, -1.0) + 1.5).abs() < 1e-12);
        assert_eq!(wait_cost_at(5, &WaitSchedule::Constant, -2.0), -2.0);
    }

    #[test]
    fn urgency_examples() {
        assert_eq!(urgency_evidence(0.0, 500, 0.005), 0.0);
        assert!((urgency_evidence::<f64>(0.5, 100, 0.005) - 1.0).abs() < 1e-12);
        assert!((urgency_evidence::<f64>(-0.5, 100, 0.005) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pes_examples() {
        let rule = PesRule::default();
        assert_eq!(pes_rho(Some(-50.0), &rule), 0.001);
        assert_eq!(pes_rho(Some(20.0), &rule), 0.003);
        assert_eq!(pes_rho(None, &rule), 0.003);
    }

    #[test]
    fn validation_ranges() {
        let mut p = AgentParams::default();
        assert!(p.validate().is_ok());
        p.epsilon = -0.1;
        let err = p.validate().unwrap_err();
        assert!(err.to_string().starts_with("agent.epsilon"));
        p.epsilon = 0.1;
        p.beta = f64::INFINITY;
        assert!(p.validate().is_ok());
        p.gamma = 1.2;
        assert!(p.validate().is_err());
        assert_eq!(AgentParams::default().frozen().epsilon, 0.0);
    }
}

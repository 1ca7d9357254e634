//! Stimulus generation and reward delivery.
//!
//! Random-draw accounting (see also [`crate::rng`]):
//!
//! - [`sample_coherence`] consumes exactly one `f64` uniform.
//! - [`sample_evidence`] consumes exactly one standard-normal sample per call
//!   in every stimulus mode, including the mirrored half of a reverse pulse
//!   where the draw is discarded. Pulse and no-pulse runs sharing a stream
//!   therefore see identical evidence outside the pulse window.
//! - [`reward_for`] consumes one `bool` only when the coherence is exactly 0.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::agent::Action;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Signed motion strength in `[-1, 1]`; positive is rightward.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Coherence<T>(T);

impl<T: Scalar> Coherence<T> {
    pub fn new(value: T) -> Result<Self> {
        if !value.is_finite() || value.abs() > T::one() {
            return Err(Error::config("coherence", format!("{value} is outside [-1, 1]")));
        }
        Ok(Self(value))
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    #[inline]
    pub fn strength(self) -> T {
        self.0.abs()
    }

    /// The correct terminating action, or `None` at zero coherence.
    pub fn correct_action(self) -> Option<Action> {
        if self.0 > T::zero() {
            Some(Action::Right)
        } else if self.0 < T::zero() {
            Some(Action::Left)
        } else {
            None
        }
    }
}

/// Discrete distribution over coherence levels.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherencePrior<T> {
    levels: Vec<Coherence<T>>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl<T: Scalar> CoherencePrior<T> {
    pub fn new(levels: Vec<T>, weights: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::config("task.coherences", "empty coherence set"));
        }
        if weights.len() != levels.len() {
            return Err(Error::config(
                "task.weights",
                format!("{} weights for {} levels", weights.len(), levels.len()),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::config("task.weights", "weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::config("task.weights", format!("weights sum to {total}, expected 1")));
        }
        for (i, a) in levels.iter().enumerate() {
            if levels[..i].contains(a) {
                return Err(Error::config("task.coherences", format!("duplicate level {a}")));
            }
        }
        let levels = levels.into_iter().map(Coherence::new).collect::<Result<Vec<_>>>()?;
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self { levels, weights, cumulative })
    }

    pub fn uniform(levels: Vec<T>) -> Result<Self> {
        let n = levels.len().max(1);
        let w = vec![1.0 / n as f64; levels.len()];
        Self::new(levels, renormalize(w))
    }

    /// Each |c| magnitude is equally likely; within a nonzero magnitude the
    /// rightward level gets `p_right` of the mass.
    pub fn directional(levels: Vec<T>, p_right: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_right) {
            return Err(Error::config("protocol.biased_right", "must lie in [0, 1]"));
        }
        let mut magnitudes: Vec<f64> = levels.iter().map(|c| c.abs().as_f64()).collect();
        magnitudes.sort_by(|a, b| a.total_cmp(b));
        magnitudes.dedup();
        let per_mag = 1.0 / magnitudes.len().max(1) as f64;
        let weights = levels
            .iter()
            .map(|c| {
                let m = c.abs().as_f64();
                let has_pair = m > 0.0 && levels.iter().any(|o| (o.as_f64() + c.as_f64()).abs() < 1e-15);
                if m == 0.0 || !has_pair {
                    per_mag
                } else if c.as_f64() > 0.0 {
                    per_mag * p_right
                } else {
                    per_mag * (1.0 - p_right)
                }
            })
            .collect();
        Self::new(levels, renormalize(weights))
    }

    pub fn levels(&self) -> &[Coherence<T>] {
        &self.levels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn renormalize(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter_mut().for_each(|x| *x /= total);
    }
    w
}

/// Payoff regime `[r_correct, r_wrong, r_wait]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardSet<T> {
    pub r_correct: T,
    pub r_wrong: T,
    pub r_wait: T,
}

impl<T: Scalar> RewardSet<T> {
    /// Conventional regime: `r_correct > 0`, `r_wrong < 0`, `r_wait < 0`.
    pub fn new(r_correct: T, r_wrong: T, r_wait: T) -> Result<Self> {
        let set = Self { r_correct, r_wrong, r_wait };
        if !set.is_conventional() {
            return Err(Error::config(
                "rewards",
                format!("[{r_correct}, {r_wrong}, {r_wait}] is not a conventional regime; use RewardSet::nonstandard"),
            ));
        }
        Ok(set)
    }

    /// Any finite regime. Check [`RewardSet::is_conventional`] for the deviation flag.
    pub fn nonstandard(r_correct: T, r_wrong: T, r_wait: T) -> Self {
        Self { r_correct, r_wrong, r_wait }
    }

    pub fn is_conventional(&self) -> bool {
        self.r_correct > T::zero() && self.r_wrong < T::zero() && self.r_wait < T::zero()
    }

    /// |r_wrong / r_correct|.
    pub fn cost_benefit_ratio(&self) -> T {
        (self.r_wrong / self.r_correct).abs()
    }
}

impl Default for RewardSet<f64> {
    fn default() -> Self {
        Self { r_correct: 20.0, r_wrong: -50.0, r_wait: -1.0 }
    }
}

/// Evidence generator parameters: `E_t ~ N(k c, sigma^2)`, one sample per `dt_ms`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvidenceParams<T> {
    pub k: T,
    pub sigma: T,
    pub dt_ms: T,
}

impl<T: Scalar> EvidenceParams<T> {
    pub fn new(k: T, sigma: T, dt_ms: T) -> Result<Self> {
        // sigma = 0 is the noiseless toy limit.
        if sigma < T::zero() || !sigma.is_finite() {
            return Err(Error::config("evidence.sigma", "must be >= 0"));
        }
        if !(dt_ms > T::zero()) || !dt_ms.is_finite() {
            return Err(Error::config("evidence.dt_ms", "must be > 0"));
        }
        if !k.is_finite() {
            return Err(Error::config("evidence.k", "must be finite"));
        }
        Ok(Self { k, sigma, dt_ms })
    }
}

impl Default for EvidenceParams<f64> {
    fn default() -> Self {
        Self { k: 0.4, sigma: 1.0, dt_ms: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StimulusMode<T> {
    Plain,
    /// A zero-sum window: `half` ordinary samples starting at `onset`,
    /// followed by the same samples negated in reverse order.
    ReversePulse { onset: usize, half: usize },
    /// Plain evidence with the noise level replaced.
    Volatility { sigma: T },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StimulusPlan<T> {
    pub mode: StimulusMode<T>,
    pub max_steps: usize,
}

impl<T: Scalar> StimulusPlan<T> {
    pub fn new(mode: StimulusMode<T>, max_steps: usize) -> Result<Self> {
        if max_steps == 0 {
            return Err(Error::config("stimulus.max_steps", "must be positive"));
        }
        match mode {
            StimulusMode::ReversePulse { onset, half } => {
                if half == 0 || onset + 2 * half > max_steps {
                    return Err(Error::config(
                        "stimulus.pulse_half",
                        format!("pulse [{onset}, {}) does not fit in {max_steps} steps", onset + 2 * half),
                    ));
                }
            }
            StimulusMode::Volatility { sigma } => {
                if sigma < T::zero() || !sigma.is_finite() {
                    return Err(Error::config("stimulus.sigma_test", "must be >= 0"));
                }
            }
            StimulusMode::Plain => {}
        }
        Ok(Self { mode, max_steps })
    }

    pub fn plain(max_steps: usize) -> Self {
        Self { mode: StimulusMode::Plain, max_steps }
    }
}

/// First-half samples of a reverse pulse, kept for the mirrored readback.
#[derive(Clone, Debug, Default)]
pub struct PulseHistory<T> {
    samples: Vec<T>,
}

impl<T> PulseHistory<T> {
    pub fn clear(&mut self) {
        self.samples.clear();
    }
}

/// Draw from `prior` using one uniform.
pub fn sample_coherence<T: Scalar, R: Rng + ?Sized>(prior: &CoherencePrior<T>, rng: &mut R) -> Coherence<T> {
    let u: f64 = rng.random();
    let idx = prior
        .cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(prior.levels.len() - 1);
    prior.levels[idx]
}

/// Momentary evidence at within-trial step `t` (calls must use t = 0, 1, 2, ...).
pub fn sample_evidence<T: Scalar, R: Rng + ?Sized>(
    c: Coherence<T>,
    params: &EvidenceParams<T>,
    plan: &StimulusPlan<T>,
    t: usize,
    history: &mut PulseHistory<T>,
    rng: &mut R,
) -> Result<T> {
    let z: f64 = rng.sample(StandardNormal);
    let z = T::lit(z);
    let mean = params.k * c.value();
    match plan.mode {
        StimulusMode::Plain => Ok(mean + params.sigma * z),
        StimulusMode::Volatility { sigma } => Ok(mean + sigma * z),
        StimulusMode::ReversePulse { onset, half } => {
            let e = mean + params.sigma * z;
            if t < onset || t >= onset + 2 * half {
                Ok(e)
            } else if t < onset + half {
                if t == onset {
                    history.clear();
                }
                history.samples.push(e);
                Ok(e)
            } else {
                if history.samples.len() != half {
                    return Err(Error::Internal(format!(
                        "reverse pulse readback at step {t} with {} of {half} recorded samples",
                        history.samples.len()
                    )));
                }
                let offset = t - onset - half;
                Ok(-history.samples[half - 1 - offset])
            }
        }
    }
}

/// Reward for taking `action` on a trial of coherence `c`.
pub fn reward_for<T: Scalar, R: Rng + ?Sized>(
    action: Action,
    c: Coherence<T>,
    rewards: &RewardSet<T>,
    rng: &mut R,
) -> (T, Option<bool>) {
    match action {
        Action::Wait => (rewards.r_wait, None),
        Action::Left | Action::Right => {
            let correct = match c.correct_action() {
                Some(a) => a == action,
                None => rng.random::<bool>(),
            };
            let r = if correct { rewards.r_correct } else { rewards.r_wrong };
            (r, Some(correct))
        }
    }
}

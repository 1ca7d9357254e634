//! Two-alternative Weibull psychometric function with lapse:
//!
//! `acc(c) = 0.5 + (0.5 - lapse) * (1 - exp(-(c / alpha)^slope))`
//!
//! fitted by bounded Levenberg-Marquardt on trial-count weighted squared
//! error. The reported threshold is the coherence at 82% correct.

use serde::{Deserialize, Serialize};

use super::psychometric::PsychometricSummary;
use crate::scalar::Scalar;

pub const THRESHOLD_LEVEL: f64 = 0.82;
const MAX_ITER: usize = 500;
const MAX_LAPSE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeibullFit {
    pub alpha: f64,
    pub slope: f64,
    pub lapse: f64,
    /// Coherence at 82% correct, if the fitted curve reaches it.
    pub threshold82: Option<f64>,
    pub sse: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FitOutcome {
    Fitted(WeibullFit),
    /// Carries the starting values that failed to converge.
    Failed { alpha: f64, slope: f64, lapse: f64 },
}

impl FitOutcome {
    pub fn fitted(&self) -> Option<&WeibullFit> {
        match self {
            FitOutcome::Fitted(f) => Some(f),
            FitOutcome::Failed { .. } => None,
        }
    }
}

pub fn weibull_accuracy<T: Scalar>(c: T, alpha: T, slope: T, lapse: T) -> T {
    let half = T::lit(0.5);
    let z = (c.abs() / alpha).powf(slope);
    half + (half - lapse) * (T::one() - (-z).exp())
}

/// Coherence at which the curve reaches `level`, if it does.
pub fn weibull_inverse<T: Scalar>(level: T, alpha: T, slope: T, lapse: T) -> Option<T> {
    let half = T::lit(0.5);
    let gain = half - lapse;
    let need = level - half;
    if !(gain > need) || need <= T::zero() {
        return None;
    }
    let x = -(T::one() - need / gain).ln();
    Some(alpha * x.powf(T::one() / slope))
}

/// Fit to `(coherence, accuracy, weight)` points.
pub fn weibull_fit_points<T: Scalar>(points: &[(T, T, T)]) -> FitOutcome {
    let pts: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|&(c, a, w)| (c.abs().as_f64(), a.as_f64(), w.as_f64()))
        .filter(|p| p.2 > 0.0)
        .collect();
    let (alpha0, lapse0) = seeds(&pts);
    let failed = FitOutcome::Failed { alpha: alpha0, slope: 1.5, lapse: lapse0 };
    let distinct = {
        let mut cs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        cs.sort_by(f64::total_cmp);
        cs.dedup();
        cs.len()
    };
    if distinct < 3 {
        return failed;
    }
    let mut best: Option<WeibullFit> = None;
    for slope0 in [1.0, 1.5, 3.0] {
        for alpha_mult in [1.0, 0.5, 2.0] {
            if let Some(f) = levenberg_marquardt(&pts, [alpha0 * alpha_mult, slope0, lapse0]) {
                if best.is_none_or(|b| f.sse < b.sse) {
                    best = Some(f);
                }
            }
        }
    }
    match best {
        Some(f) => FitOutcome::Fitted(f),
        None => failed,
    }
}

/// Fit a psychometric summary (weights are the per-row trial counts).
pub fn weibull_fit(summary: &PsychometricSummary) -> FitOutcome {
    let pts: Vec<(f64, f64, f64)> = summary
        .rows
        .iter()
        .map(|r| (r.coherence, r.accuracy, r.n_trials as f64))
        .collect();
    weibull_fit_points(&pts)
}

fn seeds(pts: &[(f64, f64, f64)]) -> (f64, f64) {
    let top = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    let at_top: Vec<&(f64, f64, f64)> = pts.iter().filter(|p| p.0 == top).collect();
    let w: f64 = at_top.iter().map(|p| p.2).sum();
    let acc_top = if w > 0.0 { at_top.iter().map(|p| p.1 * p.2).sum::<f64>() / w } else { 1.0 };
    let lapse0 = (1.0 - acc_top).clamp(0.0, 0.45);
    let target = 0.5 + (1.0 - (-1.0f64).exp()) * (0.5 - lapse0);
    let mut sorted: Vec<(f64, f64)> = pts.iter().filter(|p| p.0 > 0.0).map(|p| (p.0, p.1)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut alpha0 = sorted.get(sorted.len() / 2).map(|p| p.0).unwrap_or(0.1);
    for win in sorted.windows(2) {
        let ((c0, a0), (c1, a1)) = (win[0], win[1]);
        if a0 < target && a1 >= target {
            alpha0 = c0 + (target - a0) / (a1 - a0) * (c1 - c0);
            break;
        }
    }
    if sorted.first().is_some_and(|p| p.1 >= target) {
        alpha0 = sorted[0].0;
    }
    (alpha0.max(1e-4), lapse0)
}

fn project(p: [f64; 3]) -> [f64; 3] {
    [p[0].clamp(1e-6, 1e6), p[1].clamp(0.05, 50.0), p[2].clamp(0.0, MAX_LAPSE)]
}

fn sse_of(pts: &[(f64, f64, f64)], p: [f64; 3]) -> f64 {
    pts.iter()
        .map(|&(c, a, w)| w * (weibull_accuracy(c, p[0], p[1], p[2]) - a).powi(2))
        .sum()
}

fn levenberg_marquardt(pts: &[(f64, f64, f64)], start: [f64; 3]) -> Option<WeibullFit> {
    let wsum: f64 = pts.iter().map(|p| p.2).sum();
    let mut p = project(start);
    let mut sse = sse_of(pts, p);
    let mut mu = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..MAX_ITER {
        iterations = it + 1;
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for &(c, a, w) in pts {
            let (alpha, slope, lapse) = (p[0], p[1], p[2]);
            let z = if c > 0.0 { (c / alpha).powf(slope) } else { 0.0 };
            let e = (-z).exp();
            let gain = 0.5 - lapse;
            let pred = 0.5 + gain * (1.0 - e);
            let ln_ratio = if c > 0.0 { (c / alpha).ln() } else { 0.0 };
            let jac = [-gain * e * slope * z / alpha, gain * e * z * ln_ratio, -(1.0 - e)];
            let res = pred - a;
            for i in 0..3 {
                jtr[i] += w * jac[i] * res;
                for j in 0..3 {
                    jtj[i][j] += w * jac[i] * jac[j];
                }
            }
        }
        if sse <= 1e-30 * wsum.max(1.0) {
            converged = true;
            break;
        }
        // Parameters pinned at a bound with the gradient pointing outward
        // are held fixed for this step.
        let bounds = [(1e-6, 1e6), (0.05, 50.0), (0.0, MAX_LAPSE)];
        let pinned: [bool; 3] = std::array::from_fn(|i| {
            (p[i] <= bounds[i].0 && jtr[i] > 0.0) || (p[i] >= bounds[i].1 && jtr[i] < 0.0)
        });
        let mut improved = false;
        while mu < 1e16 {
            let mut a = jtj;
            let mut rhs = [-jtr[0], -jtr[1], -jtr[2]];
            for i in 0..3 {
                a[i][i] += mu * jtj[i][i].max(1e-12);
            }
            for i in (0..3).filter(|&i| pinned[i]) {
                for j in 0..3 {
                    a[i][j] = 0.0;
                    a[j][i] = 0.0;
                }
                a[i][i] = 1.0;
                rhs[i] = 0.0;
            }
            let Some(delta) = solve3(a, rhs) else {
                mu *= 10.0;
                continue;
            };
            let cand = project([p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]]);
            let cand_sse = sse_of(pts, cand);
            if cand_sse.is_finite() && cand_sse < sse {
                let rel_step = (0..3).map(|i| (cand[i] - p[i]).abs() / p[i].abs().max(1e-3)).fold(0.0, f64::max);
                let rel_drop = (sse - cand_sse) / sse.max(1e-300);
                p = cand;
                sse = cand_sse;
                mu = (mu / 3.0).max(1e-12);
                improved = true;
                if rel_step < 1e-10 || rel_drop < 1e-12 {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            // No descent direction left at any damping: stationary point.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged || !sse.is_finite() || p.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(WeibullFit {
        alpha: p[0],
        slope: p[1],
        lapse: p[2],
        threshold82: weibull_inverse(THRESHOLD_LEVEL, p[0], p[1], p[2]),
        sse,
        iterations,
    })
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-300 || !d.is_finite() {
        return None;
    }
    let mut x = [0.0; 3];
    for (k, xk) in x.iter_mut().enumerate() {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        *xk = det(m) / d;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::closed_form::accuracy_closed_form;

    const LEVELS: [f64; 6] = [0.0, 0.032, 0.064, 0.128, 0.256, 0.512];

    #[test]
    fn noiseless_round_trip() {
        let pts: Vec<(f64, f64, f64)> =
            LEVELS.iter().map(|&c| (c, weibull_accuracy(c, 0.1, 1.5, 0.02), 100.0)).collect();
        let f = *weibull_fit_points(&pts).fitted().expect("fit");
        assert!((f.alpha - 0.1).abs() < 1e-6, "{f:?}");
        assert!((f.slope - 1.5).abs() < 1e-6, "{f:?}");
        assert!((f.lapse - 0.02).abs() < 1e-6, "{f:?}");
    }

    #[test]
    fn round_trip_in_f32_points() {
        let pts: Vec<(f32, f32, f32)> = LEVELS
            .iter()
            .map(|&c| (c as f32, weibull_accuracy(c, 0.08, 2.0, 0.0) as f32, 50.0))
            .collect();
        let f = *weibull_fit_points(&pts).fitted().unwrap();
        assert!((f.alpha - 0.08).abs() < 1e-4 && (f.slope - 2.0).abs() < 1e-2);
    }

    #[test]
    fn threshold_of_logistic_data_matches_inversion() {
        // Analytic oracle: 1/(1+exp(-2 K c B)) = 0.82  =>  c = ln(0.82/0.18) / (2 K B).
        let (b, k) = (20.0, 0.4);
        let oracle = (0.82f64 / 0.18).ln() / (2.0 * k * b);
        assert!((oracle - 0.0948).abs() < 1e-4);
        let pts: Vec<(f64, f64, f64)> = (0..=64)
            .map(|i| {
                let c = i as f64 * 0.008;
                (c, accuracy_closed_form(c, b, k), 1.0)
            })
            .collect();
        let f = *weibull_fit_points(&pts).fitted().unwrap();
        let th = f.threshold82.unwrap();
        assert!((th - oracle).abs() < 0.005, "{th} vs {oracle}");
    }

    #[test]
    fn chance_data_gives_no_small_threshold() {
        let pts: Vec<(f64, f64, f64)> = LEVELS.iter().map(|&c| (c, 0.5, 100.0)).collect();
        match weibull_fit_points(&pts) {
            FitOutcome::Failed { .. } => {}
            FitOutcome::Fitted(f) => {
                if let Some(t) = f.threshold82 {
                    assert!(t > 0.512, "spurious threshold {t}");
                }
            }
        }
    }

    #[test]
    fn too_few_levels_fail_with_seeds() {
        let pts = [(0.1, 0.7, 10.0), (0.2, 0.9, 10.0)];
        assert!(matches!(weibull_fit_points(&pts), FitOutcome::Failed { .. }));
    }

    #[test]
    fn inverse_round_trip() {
        let c: f64 = weibull_inverse(0.82, 0.1, 1.5, 0.02).unwrap();
        assert!((weibull_accuracy(c, 0.1, 1.5, 0.02) - 0.82).abs() < 1e-12);
        assert!(weibull_inverse(0.82, 0.1, 1.5, 0.2).is_none());
    }
}

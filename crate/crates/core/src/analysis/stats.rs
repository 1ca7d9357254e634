//! Small descriptive and inferential statistics helpers used by the
//! scenario summaries and the acceptance checks.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1); 0 for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn sem(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    std_dev(xs) / (xs.len() as f64).sqrt()
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    let (mx, my) = (mean(&xs[..n]), mean(&ys[..n]));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (xs[i] - mx, ys[i] - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Average ranks (1-based), ties share their mean rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = r;
        }
        i = j + 1;
    }
    out
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    pearson(&ranks(xs), &ranks(ys))
}

/// Result of a t test: statistic, degrees of freedom, two-sided p value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

fn two_sided_p(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return if t.is_nan() { 1.0 } else { 0.0 };
    }
    if df <= 0.0 || !df.is_finite() {
        return 1.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid t distribution");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

/// Welch's unequal-variance two-sample t test of mean(a) - mean(b).
pub fn welch_t(a: &[f64], b: &[f64]) -> TTest {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    if na < 2.0 || nb < 2.0 {
        return TTest { t: 0.0, df: 0.0, p: 1.0 };
    }
    let (va, vb) = (std_dev(a).powi(2) / na, std_dev(b).powi(2) / nb);
    let diff = mean(a) - mean(b);
    let se2 = va + vb;
    if se2 == 0.0 {
        let t = if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY };
        return TTest { t, df: na + nb - 2.0, p: if diff == 0.0 { 1.0 } else { 0.0 } };
    }
    let t = diff / se2.sqrt();
    let df = se2.powi(2) / (va.powi(2) / (na - 1.0) + vb.powi(2) / (nb - 1.0));
    TTest { t, df, p: two_sided_p(t, df) }
}

/// Paired t test of mean(a - b).
pub fn paired_t(a: &[f64], b: &[f64]) -> TTest {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    one_sample_t(&d, 0.0)
}

pub fn one_sample_t(xs: &[f64], mu: f64) -> TTest {
    let n = xs.len() as f64;
    if n < 2.0 {
        return TTest { t: 0.0, df: 0.0, p: 1.0 };
    }
    let se = sem(xs);
    let diff = mean(xs) - mu;
    if se == 0.0 {
        let t = if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY };
        return TTest { t, df: n - 1.0, p: if diff == 0.0 { 1.0 } else { 0.0 } };
    }
    let t = diff / se;
    TTest { t, df: n - 1.0, p: two_sided_p(t, n - 1.0) }
}

/// Ordinary least squares `y = intercept + slope x` with slope inference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
    /// Two-sided p value for slope = 0.
    pub p: f64,
    pub df: f64,
}

impl LinearFit {
    /// Two-sided confidence interval for the slope.
    pub fn slope_ci(&self, level: f64) -> (f64, f64) {
        if self.df <= 0.0 {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let q = StudentsT::new(0.0, 1.0, self.df).unwrap().inverse_cdf(0.5 + level / 2.0);
        (self.slope - q * self.slope_se, self.slope + q * self.slope_se)
    }
}

pub fn linear_regression(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len().min(ys.len());
    let (mx, my) = (mean(&xs[..n]), mean(&ys[..n]));
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let df = n as f64 - 2.0;
    if df <= 0.0 || sxx == 0.0 {
        return LinearFit { intercept, slope, slope_se: f64::INFINITY, p: 1.0, df: df.max(0.0) };
    }
    let sse: f64 = xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_se = (sse / df / sxx).sqrt();
    let p = if slope_se == 0.0 {
        if slope == 0.0 { 1.0 } else { 0.0 }
    } else {
        two_sided_p(slope / slope_se, df)
    };
    LinearFit { intercept, slope, slope_se, p, df }
}

/// Pearson chi-square goodness-of-fit p value.
pub fn chi_square_gof(observed: &[usize], expected: &[f64]) -> f64 {
    let stat: f64 = observed.iter().zip(expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum();
    let df = (observed.len() as f64 - 1.0).max(1.0);
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

/// Two-sided pooled z test for a difference of proportions `k1/n1 - k2/n2`.
pub fn two_proportion_z(k1: usize, n1: usize, k2: usize, n2: usize) -> (f64, f64) {
    if n1 == 0 || n2 == 0 {
        return (0.0, 1.0);
    }
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        return (0.0, 1.0);
    }
    let z = (p1 - p2) / se;
    let p = 2.0 * (1.0 - Normal::new(0.0, 1.0).unwrap().cdf(z.abs()));
    (z, p)
}

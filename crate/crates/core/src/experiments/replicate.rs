use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::stats;

/// Run `f(0..n)` in parallel, returning results in index order.
pub fn replicate<R, F>(n: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Mean, sample standard deviation and SEM of a set of replications.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub sem: f64,
    pub n: usize,
}

impl Aggregate {
    pub fn of(xs: &[f64]) -> Self {
        Self { mean: stats::mean(xs), std: stats::std_dev(xs), sem: stats::sem(xs), n: xs.len() }
    }

    /// Aggregate of the finite entries only.
    pub fn of_finite(xs: &[f64]) -> Self {
        let v: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
        Self::of(&v)
    }
}

/// Element-wise aggregate of aligned series, truncated to the shortest.
pub fn aggregate_series(series: &[Vec<f64>]) -> Vec<Aggregate> {
    let len = series.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let col: Vec<f64> = series.iter().map(|s| s[i]).collect();
            Aggregate::of(&col)
        })
        .collect()
}

/// Element-wise mean of aligned series.
pub fn mean_series(series: &[Vec<f64>]) -> Vec<f64> {
    aggregate_series(series).into_iter().map(|a| a.mean).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_replication_has_zero_spread() {
        let a = Aggregate::of(&[3.5]);
        assert_eq!((a.mean, a.std, a.sem, a.n), (3.5, 0.0, 0.0, 1));
    }

    #[test]
    fn identical_series_have_zero_std() {
        let s = vec![vec![1.0, 2.0, 3.0]; 30];
        assert!(aggregate_series(&s).iter().all(|a| a.std == 0.0));
    }

    #[test]
    fn results_keep_index_order() {
        assert_eq!(replicate(100, |i| i * 2), (0..100).map(|i| i * 2).collect::<Vec<_>>());
    }

    #[test]
    fn series_truncate_to_shortest() {
        let s = vec![vec![1.0, 2.0, 3.0], vec![3.0, 4.0]];
        let a = aggregate_series(&s);
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].mean, 2.0);
    }
}

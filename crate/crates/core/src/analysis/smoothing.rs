/// Centered moving average. The window `[i - (w-1)/2, i + w/2]` shrinks at
/// the edges and each output is normalized by the number of points used.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let (before, after) = ((w - 1) / 2, w / 2);
    let mut prefix = Vec::with_capacity(xs.len() + 1);
    prefix.push(0.0);
    for x in xs {
        prefix.push(prefix.last().unwrap() + x);
    }
    (0..xs.len())
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after + 1).min(xs.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Means of consecutive bins of `bin` values; a shorter tail bin is kept.
pub fn binned_means(xs: &[f64], bin: usize) -> Vec<f64> {
    xs.chunks(bin.max(1)).map(super::stats::mean).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_fixed() {
        let xs = vec![3.0; 17];
        assert!(moving_average(&xs, 5).iter().all(|&v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn edges_shrink() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(moving_average(&xs, 3), vec![0.5, 1.0, 2.0, 3.0, 3.5]);
        assert_eq!(moving_average(&xs, 1), xs.to_vec());
    }

    #[test]
    fn bins() {
        assert_eq!(binned_means(&[1.0, 3.0, 5.0, 7.0, 9.0], 2), vec![2.0, 6.0, 9.0]);
    }
}

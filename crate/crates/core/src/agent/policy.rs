use rand::Rng;

use super::Action;
use crate::scalar::Scalar;

/// Softmax probabilities of `[Left, Right, Wait]` with max-subtraction.
/// An infinite `beta` spreads the mass evenly over the maximizers.
pub fn softmax_probabilities<T: Scalar>(row: [T; 3], beta: T) -> [T; 3] {
    restricted_probabilities(row, beta, [true; 3])
}

fn restricted_probabilities<T: Scalar>(row: [T; 3], beta: T, allowed: [bool; 3]) -> [T; 3] {
    let max = (0..3)
        .filter(|&i| allowed[i])
        .map(|i| row[i])
        .fold(T::neg_infinity(), T::max);
    let mut p = [T::zero(); 3];
    if beta.is_infinite() {
        for i in 0..3 {
            if allowed[i] && row[i] == max {
                p[i] = T::one();
            }
        }
    } else {
        for i in 0..3 {
            if allowed[i] {
                p[i] = (beta * (row[i] - max)).exp();
            }
        }
    }
    let total: T = p.iter().copied().sum();
    p.map(|x| x / total)
}

/// Sample an action among those in `allowed` using exactly one uniform.
pub fn select_action<T: Scalar, R: Rng + ?Sized>(row: [T; 3], beta: T, allowed: [bool; 3], rng: &mut R) -> Action {
    let u: f64 = rng.random();
    if beta.is_infinite() {
        let max = (0..3)
            .filter(|&i| allowed[i])
            .map(|i| row[i])
            .fold(T::neg_infinity(), T::max);
        let ties: Vec<usize> = (0..3).filter(|&i| allowed[i] && row[i] == max).collect();
        let pick = ((u * ties.len() as f64) as usize).min(ties.len() - 1);
        return Action::ALL[ties[pick]];
    }
    let p = restricted_probabilities(row, beta, allowed);
    let mut acc = 0.0;
    let mut last = 0;
    for i in 0..3 {
        if !allowed[i] {
            continue;
        }
        last = i;
        acc += p[i].as_f64();
        if u < acc {
            return Action::ALL[i];
        }
    }
    Action::ALL[last]
}

/// Softmax action selection over all three actions.
pub fn softmax_policy<T: Scalar, R: Rng + ?Sized>(row: [T; 3], beta: T, rng: &mut R) -> Action {
    select_action(row, beta, [true; 3], rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_values_are_uniform() {
        for beta in [0.0, 1.0, 50.0, 1e6] {
            let p = softmax_probabilities([3.0f64, 3.0, 3.0], beta);
            for x in p {
                assert!((x - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn beta_fifty_example() {
        let p = softmax_probabilities([0.1, 0.0, 0.0], 50.0);
        let expected = 5f64.exp() / (5f64.exp() + 2.0);
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] - 0.98670).abs() < 1e-5);
    }

    #[test]
    fn infinite_beta_is_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(softmax_policy([1.0, 2.0, 0.0], f64::INFINITY, &mut rng), Action::Right);
        }
    }

    #[test]
    fn infinite_beta_breaks_ties_uniformly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 30_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[softmax_policy([0.0, 0.0, 0.0], f64::INFINITY, &mut rng).index()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.015, "{counts:?}");
        }
    }

    #[test]
    fn restricted_selection_never_picks_excluded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let a = select_action([0.0, 0.0, 100.0], 50.0, [true, true, false], &mut rng);
            assert_ne!(a, Action::Wait);
        }
    }

    #[test]
    fn empirical_frequencies_match_probabilities() {
        let row = [0.02, -0.01, 0.0];
        let p = softmax_probabilities(row, 50.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 60_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[softmax_policy(row, 50.0, &mut rng).index()] += 1;
        }
        for i in 0..3 {
            let sd = (p[i] * (1.0 - p[i]) / n as f64).sqrt();
            assert!((counts[i] as f64 / n as f64 - p[i]).abs() < 4.0 * sd);
        }
    }

    proptest! {
        #[test]
        fn normalized_and_shift_invariant(
            a in -600_000i64..300_000, b in -600_000i64..300_000, c in -600_000i64..300_000,
            beta in 0.0f64..200.0, shift in -1_000_000i64..1_000_000,
        ) {
            // Values on a 1/1024 grid so that adding the shift is exact.
            let g = |x: i64| x as f64 / 1024.0;
            let p = softmax_probabilities([g(a), g(b), g(c)], beta);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let q = softmax_probabilities([g(a + shift), g(b + shift), g(c + shift)], beta);
            for i in 0..3 {
                prop_assert!((p[i] - q[i]).abs() < 1e-12, "{:?} {:?}", p, q);
            }
        }

        #[test]
        fn argmax_shift_invariant(a in -50i32..50, b in -50i32..50, c in -50i32..50, shift in -100i32..100) {
            let p = softmax_probabilities([a as f64, b as f64, c as f64], f64::INFINITY);
            let s = shift as f64;
            let q = softmax_probabilities([a as f64 + s, b as f64 + s, c as f64 + s], f64::INFINITY);
            prop_assert_eq!(p, q);
        }
    }
}

//! Paired one-sided tests on per-sample differences.

use serde::Serialize;
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, StudentsT};

/// Test of `H1: baseline > treatment` on paired observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedTest {
    pub n: usize,
    /// Mean of `baseline - treatment`.
    pub mean_difference: f64,
    pub std_error: f64,
    pub t: f64,
    pub t_p: f64,
    pub sign_wins: usize,
    pub sign_losses: usize,
    pub sign_ties: usize,
    pub sign_p: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean, `sd / sqrt(n)`; zero for fewer than two values.
pub fn std_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// One-sided sign test p-value: `P(X >= wins)` for `X ~ Bin(wins + losses, 1/2)`.
/// Exact ties are dropped.
pub fn sign_test(wins: usize, losses: usize) -> f64 {
    let n = (wins + losses) as u64;
    if n == 0 {
        return 1.0;
    }
    if wins == 0 {
        return 1.0;
    }
    let b = Binomial::new(0.5, n).expect("valid binomial");
    b.sf(wins as u64 - 1)
}

pub fn paired_test(baseline: &[f64], treatment: &[f64]) -> PairedTest {
    assert_eq!(baseline.len(), treatment.len(), "paired samples differ in length");
    let diffs: Vec<f64> = baseline.iter().zip(treatment).map(|(b, t)| b - t).collect();
    let n = diffs.len();
    let mean_difference = mean(&diffs);
    let se = std_error(&diffs);
    let (t, t_p) = if se > 0.0 {
        let t = mean_difference / se;
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("valid t distribution");
        (t, dist.sf(t))
    } else if mean_difference > 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        (0.0, 1.0)
    };
    let sign_wins = diffs.iter().filter(|d| **d > 0.0).count();
    let sign_losses = diffs.iter().filter(|d| **d < 0.0).count();
    PairedTest {
        n,
        mean_difference,
        std_error: se,
        t,
        t_p,
        sign_wins,
        sign_losses,
        sign_ties: n - sign_wins - sign_losses,
        sign_p: sign_test(sign_wins, sign_losses),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn choose(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn sign_test_against_direct_binomial_sum() {
        for (wins, losses) in [(8, 2), (5, 5), (12, 0), (30, 20), (1, 9)] {
            let n = (wins + losses) as u64;
            let direct: f64 = (wins as u64..=n).map(|k| choose(n, k)).sum::<f64>() / 2f64.powi(n as i32);
            assert!((sign_test(wins, losses) - direct).abs() < 1e-12, "{wins}/{losses}");
        }
        assert_eq!(sign_test(0, 0), 1.0);
    }

    #[test]
    fn paired_t_by_hand() {
        // Differences 1, 2, 3: mean 2, sd 1, se 1/sqrt(3).
        let t = paired_test(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]);
        assert_eq!(t.sign_wins, 3);
        assert!((t.mean_difference - 2.0).abs() < 1e-15);
        assert!((t.t - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        // Two degrees of freedom: sf(t) = (1 - t / sqrt(t^2 + 2)) / 2.
        let closed = 0.5 * (1.0 - t.t / (t.t * t.t + 2.0).sqrt());
        assert!((t.t_p - closed).abs() < 1e-10);
    }

    #[test]
    fn ties_are_dropped() {
        let t = paired_test(&[1.0, 1.0, 2.0], &[1.0, 0.0, 3.0]);
        assert_eq!((t.sign_wins, t.sign_losses, t.sign_ties), (1, 1, 1));
        assert!((t.sign_p - 0.75).abs() < 1e-12);
    }
}

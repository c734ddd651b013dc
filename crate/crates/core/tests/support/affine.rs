//! Exact-arithmetic check that a belief's expected paperclip reward equals
//! the reward at its mean theta, for every robot production.

#![allow(dead_code)]

use cirl_core::equilibrium::robot_action_for_mean;
use cirl_core::game::paperclip::{Production, ROBOT_ACTIONS};
use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use rand::Rng;

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn reward(a: Production, theta: &BigRational) -> BigRational {
    theta * BigRational::from_integer(a.paperclips.into())
        + (BigRational::one() - theta) * BigRational::from_integer(a.staples.into())
}

/// Grid `i / (k - 1)` for `i = 0..k`.
pub fn grid(k: usize) -> Vec<BigRational> {
    (0..k).map(|i| rational(i as i64, k as i64 - 1)).collect()
}

#[derive(Debug, Default)]
pub struct AffineStats {
    pub beliefs: usize,
    pub ties: usize,
}

/// Check one weighting. Returns whether the mean sits on a tie between
/// robot productions.
pub fn check_weighting(points: &[BigRational], weights: &[u32]) -> Result<bool, String> {
    let total: u64 = weights.iter().map(|&w| u64::from(w)).sum();
    if total == 0 {
        return Err("weights sum to zero".into());
    }
    let total = BigRational::from_integer(total.into());
    let prob: Vec<BigRational> = weights
        .iter()
        .map(|&w| BigRational::from_integer(w.into()) / &total)
        .collect();
    let mean = points.iter().zip(&prob).fold(BigRational::zero(), |acc, (t, p)| acc + t * p);

    let mut expected = Vec::with_capacity(3);
    for &a in &ROBOT_ACTIONS {
        let e = points
            .iter()
            .zip(&prob)
            .fold(BigRational::zero(), |acc, (t, p)| acc + reward(a, t) * p);
        let at_mean = reward(a, &mean);
        if e != at_mean {
            return Err(format!("production {a}: E[R] = {e} but R(mean) = {at_mean}"));
        }
        expected.push(e);
    }
    let best = expected.iter().max().expect("three productions").clone();
    let argmax: Vec<usize> = (0..3).filter(|&i| expected[i] == best).collect();
    let chosen = robot_action_for_mean(mean.to_f64().ok_or("mean not representable")?);
    if !argmax.contains(&chosen) {
        return Err(format!(
            "mean {mean}: robot chose {} but the expected-reward argmax is {argmax:?}",
            ROBOT_ACTIONS[chosen]
        ));
    }
    Ok(argmax.len() > 1)
}

/// `random` random weightings (about a third of the grid points zeroed) plus
/// a point mass on every grid point.
pub fn check_beliefs<R: Rng>(rng: &mut R, k: usize, random: usize) -> Result<AffineStats, String> {
    let points = grid(k);
    let mut stats = AffineStats::default();
    for _ in 0..random {
        let mut weights: Vec<u32> = (0..k)
            .map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..1_000_000) })
            .collect();
        if weights.iter().all(|&w| w == 0) {
            weights[rng.gen_range(0..k)] = 1;
        }
        stats.ties += usize::from(check_weighting(&points, &weights)?);
        stats.beliefs += 1;
    }
    for i in 0..k {
        let mut weights = vec![0; k];
        weights[i] = 1;
        stats.ties += usize::from(check_weighting(&points, &weights)?);
        stats.beliefs += 1;
    }
    Ok(stats)
}

//! Brute-force reference computations by explicit trajectory enumeration.
//!
//! Nothing here calls the planners; only the world's transition table and
//! feature rows are used.

#![allow(dead_code)]

use cirl_core::{RewardParams, World};

/// Every action sequence of length `steps`, in lexicographic order.
pub fn action_sequences(num_actions: usize, steps: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..steps {
        out = out
            .into_iter()
            .flat_map(|seq| {
                (0..num_actions).map(move |a| {
                    let mut s = seq.clone();
                    s.push(a);
                    s
                })
            })
            .collect();
    }
    out
}

pub fn visited_states<W: World>(world: &W, start: usize, actions: &[usize]) -> Vec<usize> {
    let mut states = vec![start];
    for &a in actions {
        states.push(world.next_state(*states.last().unwrap(), a));
    }
    states
}

pub fn path_features<W: World>(world: &W, states: &[usize]) -> Vec<f64> {
    let mut phi = vec![0.0; world.num_features()];
    for &s in states {
        for (k, f) in world.features(s).iter().enumerate() {
            phi[k] += f;
        }
    }
    phi
}

fn state_reward<W: World>(world: &W, s: usize, theta: &RewardParams) -> f64 {
    world.features(s).iter().zip(&theta.0).map(|(f, t)| f * t).sum()
}

/// Undiscounted return accumulated from the last state backwards.
pub fn path_return<W: World>(world: &W, states: &[usize], theta: &RewardParams) -> f64 {
    states
        .iter()
        .rev()
        .fold(None, |acc: Option<f64>, &s| {
            let r = state_reward(world, s, theta);
            Some(match acc {
                None => r,
                Some(rest) => r + rest,
            })
        })
        .unwrap()
}

/// Best return over all open-loop action sequences from `start`.
pub fn max_return<W: World>(world: &W, theta: &RewardParams, steps: usize, start: usize) -> f64 {
    action_sequences(world.num_actions(), steps)
        .iter()
        .map(|seq| path_return(world, &visited_states(world, start, seq), theta))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Log-weights `lambda theta . phi(tau)` of every sequence from the initial state.
pub fn log_scores<W: World>(world: &W, theta: &RewardParams, lambda: f64, steps: usize) -> Vec<(Vec<usize>, f64)> {
    action_sequences(world.num_actions(), steps)
        .into_iter()
        .map(|seq| {
            let phi = path_features(world, &visited_states(world, world.initial_state(), &seq));
            let score = lambda * dot(&phi, &theta.0);
            (seq, score)
        })
        .collect()
}

pub fn log_partition<W: World>(world: &W, theta: &RewardParams, lambda: f64, steps: usize) -> f64 {
    let scores: Vec<f64> = log_scores(world, theta, lambda, steps).into_iter().map(|(_, s)| s).collect();
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}

/// `P(tau) = exp(lambda theta . phi(tau)) / Z` for every sequence.
pub fn trajectory_probabilities<W: World>(
    world: &W,
    theta: &RewardParams,
    lambda: f64,
    steps: usize,
) -> Vec<(Vec<usize>, f64)> {
    let log_z = log_partition(world, theta, lambda, steps);
    log_scores(world, theta, lambda, steps)
        .into_iter()
        .map(|(seq, s)| (seq, (s - log_z).exp()))
        .collect()
}

/// `sum_tau P(tau) log(P(tau) / Q(tau))`.
pub fn kl<W: World>(world: &W, p: &RewardParams, q: &RewardParams, lambda: f64, steps: usize) -> f64 {
    let lp = log_partition(world, p, lambda, steps);
    let lq = log_partition(world, q, lambda, steps);
    let sp = log_scores(world, p, lambda, steps);
    let sq = log_scores(world, q, lambda, steps);
    sp.iter()
        .zip(&sq)
        .map(|((_, a), (_, b))| {
            let log_p = a - lp;
            let log_q = b - lq;
            log_p.exp() * (log_p - log_q)
        })
        .sum()
}

/// Posterior over a finite particle set: prior x likelihood / evidence.
pub fn posterior<W: World>(
    world: &W,
    particles: &[RewardParams],
    prior: &[f64],
    observed: &[usize],
    lambda: f64,
) -> Vec<f64> {
    let steps = observed.len();
    let joint: Vec<f64> = particles
        .iter()
        .zip(prior)
        .map(|(theta, p)| {
            let probs = trajectory_probabilities(world, theta, lambda, steps);
            let like = probs.iter().find(|(seq, _)| seq == observed).unwrap().1;
            p * like
        })
        .collect();
    let evidence: f64 = joint.iter().sum();
    joint.iter().map(|j| j / evidence).collect()
}

/// Central finite-difference gradient of the enumerated log-partition.
pub fn log_partition_gradient<W: World>(world: &W, theta: &RewardParams, lambda: f64, steps: usize, h: f64) -> Vec<f64> {
    (0..theta.len())
        .map(|k| {
            let mut up = theta.clone();
            let mut down = theta.clone();
            up.0[k] += h;
            down.0[k] -= h;
            (log_partition(world, &up, lambda, steps) - log_partition(world, &down, lambda, steps)) / (2.0 * h)
        })
        .collect()
}

//! Deployment regret, trajectory-distribution KL and reward-vector distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{state_rewards, RewardParams, World};
use crate::planning::{evaluate_plan, occupancy_and_features, soft_value_iteration, value_iteration};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub regret: f64,
    pub kl: f64,
    pub reward_l2: f64,
    pub theta_gt: RewardParams,
    pub theta_hat: RewardParams,
}

/// Mean over uniformly drawn start states of the value lost, under the true
/// reward, by following the plan that is optimal for `theta_hat`.
pub fn regret<W: World + ?Sized>(
    world: &W,
    theta_gt: &RewardParams,
    theta_hat: &RewardParams,
    deployment_steps: usize,
) -> Result<f64> {
    let per_state = regret_by_state(world, theta_gt, theta_hat, deployment_steps)?;
    Ok(per_state.iter().sum::<f64>() / per_state.len() as f64)
}

/// Per-start-state regret, `V*(s) - V^{pi_hat}(s)` under `theta_gt`.
pub fn regret_by_state<W: World + ?Sized>(
    world: &W,
    theta_gt: &RewardParams,
    theta_hat: &RewardParams,
    deployment_steps: usize,
) -> Result<Vec<f64>> {
    let optimal = value_iteration(world, theta_gt, deployment_steps)?;
    let deployed = value_iteration(world, theta_hat, deployment_steps)?;
    let true_rewards = state_rewards(world, theta_gt)?;
    let achieved = evaluate_plan(world, &deployed, &true_rewards);
    Ok(optimal
        .values(0)
        .iter()
        .zip(&achieved)
        .map(|(v, a)| v - a)
        .collect())
}

/// `KL(P_theta_hat || P_theta_gt)` between MaxEnt trajectory distributions of
/// `steps` actions from the initial state, by the chain rule over steps.
pub fn kl_divergence<W: World + ?Sized>(
    world: &W,
    theta_hat: &RewardParams,
    theta_gt: &RewardParams,
    lambda: f64,
    steps: usize,
) -> Result<f64> {
    let p = soft_value_iteration(world, theta_hat, lambda, steps)?;
    let q = soft_value_iteration(world, theta_gt, lambda, steps)?;
    let occ = occupancy_and_features(world, p.policy(), world.initial_state(), steps)?;
    let mut total = 0.0;
    for t in 0..steps {
        for (s, &d) in occ.visitation[t].iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let local: f64 = p
                .log_probs(t, s)
                .iter()
                .zip(q.log_probs(t, s))
                .map(|(lp, lq)| lp.exp() * (lp - lq))
                .sum();
            total += d * local;
        }
    }
    // Rounding can leave a tiny negative residue when the two coincide.
    Ok(total.max(0.0))
}

/// Euclidean norm of the per-state reward difference `Phi (theta_hat - theta_gt)`.
pub fn reward_l2<W: World + ?Sized>(
    world: &W,
    theta_hat: &RewardParams,
    theta_gt: &RewardParams,
) -> Result<f64> {
    if theta_hat.len() != theta_gt.len() {
        return Err(Error::input("theta vectors differ in length"));
    }
    let diff = RewardParams(
        theta_hat
            .as_slice()
            .iter()
            .zip(theta_gt.as_slice())
            .map(|(a, b)| a - b)
            .collect(),
    );
    Ok(state_rewards(world, &diff)?.iter().map(|r| r * r).sum::<f64>().sqrt())
}

pub fn evaluate<W: World + ?Sized>(
    world: &W,
    theta_gt: &RewardParams,
    theta_hat: &RewardParams,
    lambda: f64,
) -> Result<EvalResult> {
    Ok(EvalResult {
        regret: regret(world, theta_gt, theta_hat, world.deployment_steps())?,
        kl: kl_divergence(world, theta_hat, theta_gt, lambda, world.learning_steps())?,
        reward_l2: reward_l2(world, theta_hat, theta_gt)?,
        theta_gt: theta_gt.clone(),
        theta_hat: theta_hat.clone(),
    })
}

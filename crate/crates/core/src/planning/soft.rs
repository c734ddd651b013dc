use crate::error::{Error, Result};
use crate::game::{state_rewards, RewardParams, World};

use super::{log_sum_exp, PolicyTable};

/// Maximum-entropy plan: the trajectory distribution `P(tau) ~ exp(lambda theta . phi(tau))`
/// expressed as per-step soft policies.
#[derive(Debug, Clone)]
pub struct SoftPlan {
    steps: usize,
    num_states: usize,
    num_actions: usize,
    initial_state: usize,
    /// `(steps + 1) x states`
    soft_values: Vec<f64>,
    /// `steps x states x actions`
    log_policy: Vec<f64>,
    policy: PolicyTable,
}

impl SoftPlan {
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn soft_value(&self, t: usize, s: usize) -> f64 {
        self.soft_values[t * self.num_states + s]
    }

    /// `log sum_tau exp(lambda theta . phi(tau))` over trajectories from the initial state.
    pub fn log_partition(&self) -> f64 {
        self.soft_value(0, self.initial_state)
    }

    pub fn policy(&self) -> &PolicyTable {
        &self.policy
    }

    pub fn log_prob(&self, t: usize, s: usize, a: usize) -> f64 {
        self.log_policy[(t * self.num_states + s) * self.num_actions + a]
    }

    pub fn log_probs(&self, t: usize, s: usize) -> &[f64] {
        let start = (t * self.num_states + s) * self.num_actions;
        &self.log_policy[start..start + self.num_actions]
    }

    /// Log-probability of an action sequence from `start`.
    pub fn log_prob_of_actions<W: World + ?Sized>(&self, world: &W, start: usize, actions: &[usize]) -> f64 {
        let mut s = start;
        let mut total = 0.0;
        for (t, &a) in actions.iter().enumerate() {
            total += self.log_prob(t, s, a);
            s = world.next_state(s, a);
        }
        total
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::input(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    Ok(())
}

/// Soft (log-sum-exp) value iteration.
///
/// `V_t(s) = lambda r(s) + log sum_a exp V_{t+1}(s'(s, a))`, terminal layer
/// `lambda r(s)`, and `pi_t(a | s) ~ exp V_{t+1}(s'(s, a))`.
pub fn soft_value_iteration<W: World + ?Sized>(
    world: &W,
    theta: &RewardParams,
    lambda: f64,
    steps: usize,
) -> Result<SoftPlan> {
    check_lambda(lambda)?;
    if steps == 0 {
        return Err(Error::input("soft value iteration needs at least one step"));
    }
    let rewards = state_rewards(world, theta)?;
    let ns = world.num_states();
    let na = world.num_actions();
    let mut soft_values = vec![0.0; (steps + 1) * ns];
    let mut log_policy = vec![0.0; steps * ns * na];
    for s in 0..ns {
        soft_values[steps * ns + s] = lambda * rewards[s];
    }
    for t in (0..steps).rev() {
        let (head, tail) = soft_values.split_at_mut((t + 1) * ns);
        let next = &tail[..ns];
        for s in 0..ns {
            let succ = (0..na).map(|a| next[world.next_state(s, a)]);
            let lse = log_sum_exp(succ.clone());
            for (a, v) in succ.enumerate() {
                log_policy[(t * ns + s) * na + a] = v - lse;
            }
            head[t * ns + s] = lambda * rewards[s] + lse;
        }
    }
    let probs = log_policy.iter().map(|l| l.exp()).collect();
    Ok(SoftPlan {
        steps,
        num_states: ns,
        num_actions: na,
        initial_state: world.initial_state(),
        soft_values,
        log_policy,
        policy: PolicyTable::new(ns, na, probs)?,
    })
}

/// Log-partition of the MaxEnt trajectory distribution from `start`, without
/// materialising the policy.
pub fn log_partition<W: World + ?Sized>(
    world: &W,
    theta: &RewardParams,
    lambda: f64,
    steps: usize,
    start: usize,
) -> Result<f64> {
    check_lambda(lambda)?;
    let rewards = state_rewards(world, theta)?;
    Ok(log_partition_for_rewards(world, &rewards, lambda, steps, start))
}

pub(crate) fn log_partition_for_rewards<W: World + ?Sized>(
    world: &W,
    rewards: &[f64],
    lambda: f64,
    steps: usize,
    start: usize,
) -> f64 {
    let ns = world.num_states();
    let na = world.num_actions();
    let mut current: Vec<f64> = rewards.iter().map(|r| lambda * r).collect();
    let mut next = vec![0.0; ns];
    for _ in 0..steps {
        std::mem::swap(&mut current, &mut next);
        for s in 0..ns {
            let lse = log_sum_exp((0..na).map(|a| next[world.next_state(s, a)]));
            current[s] = lambda * rewards[s] + lse;
        }
    }
    current[start]
}

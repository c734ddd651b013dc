use crate::error::{Error, Result};
use crate::game::{state_rewards, RewardParams, Trajectory, World};

use super::PolicyTable;

/// Bellman-optimal finite-horizon plan.
#[derive(Debug, Clone)]
pub struct Plan {
    steps: usize,
    num_states: usize,
    num_actions: usize,
    /// `(steps + 1) x states`; the last layer is the terminal reward.
    values: Vec<f64>,
    /// `steps x states x actions`
    q_values: Vec<f64>,
    /// `steps x states`
    greedy: Vec<usize>,
}

impl Plan {
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn value(&self, t: usize, s: usize) -> f64 {
        self.values[t * self.num_states + s]
    }

    /// Value layer `t` over all states.
    pub fn values(&self, t: usize) -> &[f64] {
        &self.values[t * self.num_states..(t + 1) * self.num_states]
    }

    pub fn q_value(&self, t: usize, s: usize, a: usize) -> f64 {
        self.q_values[(t * self.num_states + s) * self.num_actions + a]
    }

    pub fn action(&self, t: usize, s: usize) -> usize {
        self.greedy[t * self.num_states + s]
    }

    pub fn rollout<W: World + ?Sized>(&self, world: &W, start: usize) -> Result<Trajectory> {
        let mut tau = Trajectory::start(world, start)?;
        for t in 0..self.steps {
            let a = self.action(t, tau.last_state());
            tau.push(world, a)?;
        }
        Ok(tau)
    }

    pub fn as_policy<W: World + ?Sized>(&self, world: &W) -> PolicyTable {
        PolicyTable::deterministic(world, self.steps, |t, s| self.action(t, s))
    }
}

/// Finite-horizon value iteration for the reward induced by `theta`.
///
/// `values[t][s] = r(s) + gamma * max_a values[t+1][s'(s, a)]`, with the
/// terminal layer `r(s)`. Ties go to the lowest action index.
pub fn value_iteration<W: World + ?Sized>(
    world: &W,
    theta: &RewardParams,
    steps: usize,
) -> Result<Plan> {
    if steps == 0 {
        return Err(Error::input("value iteration needs at least one step"));
    }
    let rewards = state_rewards(world, theta)?;
    Ok(plan_for_rewards(world, &rewards, steps))
}

pub(crate) fn plan_for_rewards<W: World + ?Sized>(world: &W, rewards: &[f64], steps: usize) -> Plan {
    let ns = world.num_states();
    let na = world.num_actions();
    let gamma = world.gamma();
    let mut values = vec![0.0; (steps + 1) * ns];
    let mut q_values = vec![0.0; steps * ns * na];
    let mut greedy = vec![0; steps * ns];
    values[steps * ns..].copy_from_slice(rewards);
    for t in (0..steps).rev() {
        let (head, tail) = values.split_at_mut((t + 1) * ns);
        let next = &tail[..ns];
        let current = &mut head[t * ns..];
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            let mut best_a = 0;
            for a in 0..na {
                let q = rewards[s] + gamma * next[world.next_state(s, a)];
                q_values[(t * ns + s) * na + a] = q;
                if q > best {
                    best = q;
                    best_a = a;
                }
            }
            current[s] = best;
            greedy[t * ns + s] = best_a;
        }
    }
    Plan {
        steps,
        num_states: ns,
        num_actions: na,
        values,
        q_values,
        greedy,
    }
}

/// Value of following `plan`'s greedy actions when rewards are `rewards`.
///
/// Returns the time-0 value of every start state.
pub fn evaluate_plan<W: World + ?Sized>(world: &W, plan: &Plan, rewards: &[f64]) -> Vec<f64> {
    let ns = world.num_states();
    let gamma = world.gamma();
    let mut values = rewards.to_vec();
    let mut next = vec![0.0; ns];
    for t in (0..plan.steps).rev() {
        std::mem::swap(&mut values, &mut next);
        for s in 0..ns {
            values[s] = rewards[s] + gamma * next[world.next_state(s, plan.action(t, s))];
        }
    }
    values
}

//! Finite-horizon planning on deterministic worlds.
//!
//! Rewards accrue on occupied states, the terminal state included, so a
//! `steps`-action trajectory collects `steps + 1` state rewards and its
//! return under theta is exactly `theta . phi(tau)`.

mod hard;
mod occupancy;
mod soft;

pub use hard::{evaluate_plan, value_iteration, Plan};
pub use occupancy::{occupancy_and_features, Occupancy};
pub use soft::{log_partition, soft_value_iteration, SoftPlan};

use crate::error::{Error, Result};
use crate::game::World;

/// Per-timestep stochastic policy: `layers x states x actions` probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl PolicyTable {
    pub fn new(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Result<Self> {
        let block = num_states * num_actions;
        if block == 0 || probs.len() % block != 0 {
            return Err(Error::input("policy table size is not a whole number of layers"));
        }
        Ok(PolicyTable {
            num_states,
            num_actions,
            probs,
        })
    }

    pub fn uniform<W: World + ?Sized>(world: &W, steps: usize) -> Self {
        let a = world.num_actions();
        PolicyTable {
            num_states: world.num_states(),
            num_actions: a,
            probs: vec![1.0 / a as f64; steps * world.num_states() * a],
        }
    }

    /// Point-mass policy following `choose(t, s)`.
    pub fn deterministic<W, F>(world: &W, steps: usize, choose: F) -> Self
    where
        W: World + ?Sized,
        F: Fn(usize, usize) -> usize,
    {
        let (ns, na) = (world.num_states(), world.num_actions());
        let mut probs = vec![0.0; steps * ns * na];
        for t in 0..steps {
            for s in 0..ns {
                probs[(t * ns + s) * na + choose(t, s)] = 1.0;
            }
        }
        PolicyTable {
            num_states: ns,
            num_actions: na,
            probs,
        }
    }

    pub fn layers(&self) -> usize {
        self.probs.len() / (self.num_states * self.num_actions)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn row(&self, t: usize, s: usize) -> &[f64] {
        let start = (t * self.num_states + s) * self.num_actions;
        &self.probs[start..start + self.num_actions]
    }

    pub fn prob(&self, t: usize, s: usize, a: usize) -> f64 {
        self.row(t, s)[a]
    }

    /// Check every row is a distribution within `tol`.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        for (i, row) in self.probs.chunks(self.num_actions).enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > tol {
                let (t, s) = (i / self.num_states, i % self.num_states);
                return Err(Error::input(format!(
                    "policy row (t={t}, s={s}) is not a distribution (sum {sum})"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

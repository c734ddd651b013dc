//! Game structure: worlds, reward parameters, features and trajectories.
//!
//! The navigation game is a deterministic tabular world whose reward is
//! linear in per-state features. Planning, inference and evaluation work
//! against the [`World`] trait so the same code runs on the gridworld and on
//! the small hand-built worlds used as enumeration oracles.

mod features;
mod grid;
pub mod paperclip;
mod tabular;
mod trajectory;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::config::GameConfig;
use crate::error::{Error, Result};
use crate::seed::Rng;

pub use features::FeatureMap;
pub use grid::{Action, Cell, GridWorld};
pub use tabular::TabularWorld;
pub use trajectory::Trajectory;

/// A finite deterministic world with linear state rewards.
pub trait World: Sync {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn num_features(&self) -> usize;
    /// Successor of `state` under `action`. Total over valid indices.
    fn next_state(&self, state: usize, action: usize) -> usize;
    /// Feature row of `state`.
    fn features(&self, state: usize) -> &[f64];
    fn initial_state(&self) -> usize;
    fn learning_steps(&self) -> usize;
    fn deployment_steps(&self) -> usize;

    fn gamma(&self) -> f64 {
        1.0
    }
}

/// Reward weights over features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RewardParams(pub Vec<f64>);

impl RewardParams {
    pub fn zeros(n: usize) -> Self {
        RewardParams(vec![0.0; n])
    }

    /// Checked constructor: components must lie in the prior support [-1, 1].
    pub fn in_support(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::input(format!("theta component {v} outside [-1, 1]")));
        }
        Ok(RewardParams(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        RewardParams(self.0.iter().map(|v| v * c).collect())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_theta<W: World + ?Sized>(world: &W, theta: &RewardParams) -> Result<()> {
    if theta.len() != world.num_features() {
        return Err(Error::input(format!(
            "theta has {} components, world has {} features",
            theta.len(),
            world.num_features()
        )));
    }
    Ok(())
}

/// Reward of occupying `state`: the feature row dotted with theta.
pub fn reward<W: World + ?Sized>(world: &W, state: usize, theta: &RewardParams) -> Result<f64> {
    check_theta(world, theta)?;
    if state >= world.num_states() {
        return Err(Error::input(format!("state {state} out of range")));
    }
    Ok(dot(world.features(state), theta.as_slice()))
}

/// Per-state reward vector for `theta`.
pub fn state_rewards<W: World + ?Sized>(world: &W, theta: &RewardParams) -> Result<Vec<f64>> {
    check_theta(world, theta)?;
    Ok((0..world.num_states())
        .map(|s| dot(world.features(s), theta.as_slice()))
        .collect())
}

/// Draw theta uniformly from [-1, 1]^n, component by component.
pub fn sample_theta(config: &GameConfig, rng: &mut Rng) -> RewardParams {
    sample_uniform_theta(config.num_features, rng)
}

pub(crate) fn sample_uniform_theta(n: usize, rng: &mut Rng) -> RewardParams {
    RewardParams((0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
}

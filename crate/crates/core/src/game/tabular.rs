use super::World;
use crate::error::{Error, Result};

/// Explicit deterministic world given by a transition table and feature rows.
///
/// Small instances of this type back the enumeration oracles in tests.
#[derive(Debug, Clone)]
pub struct TabularWorld {
    num_actions: usize,
    num_features: usize,
    /// `next[s * num_actions + a]`
    next: Vec<usize>,
    features: Vec<f64>,
    initial: usize,
    learning_steps: usize,
    deployment_steps: usize,
    gamma: f64,
}

impl TabularWorld {
    /// `next[s][a]` is the successor; `features[s]` the feature row.
    pub fn new(next: Vec<Vec<usize>>, features: Vec<Vec<f64>>, initial: usize) -> Result<Self> {
        let num_states = next.len();
        if num_states == 0 || features.len() != num_states {
            return Err(Error::input("transition and feature tables must cover the same states"));
        }
        let num_actions = next[0].len();
        let num_features = features[0].len();
        if num_actions == 0 || num_features == 0 {
            return Err(Error::input("need at least one action and one feature"));
        }
        if next.iter().any(|row| row.len() != num_actions || row.iter().any(|&t| t >= num_states)) {
            return Err(Error::input("ragged or out-of-range transition table"));
        }
        if features.iter().any(|row| row.len() != num_features) {
            return Err(Error::input("ragged feature table"));
        }
        if initial >= num_states {
            return Err(Error::input("initial state out of range"));
        }
        Ok(TabularWorld {
            num_actions,
            num_features,
            next: next.into_iter().flatten().collect(),
            features: features.into_iter().flatten().collect(),
            initial,
            learning_steps: 1,
            deployment_steps: 1,
            gamma: 1.0,
        })
    }

    /// Cells `0..n` on a line with actions (left, right, stay); the ends are walls.
    pub fn chain(features: Vec<Vec<f64>>, initial: usize) -> Result<Self> {
        let n = features.len();
        let next = (0..n)
            .map(|s| vec![s.saturating_sub(1), (s + 1).min(n - 1), s])
            .collect();
        Self::new(next, features, initial)
    }

    pub fn with_horizons(mut self, learning_steps: usize, deployment_steps: usize) -> Self {
        self.learning_steps = learning_steps;
        self.deployment_steps = deployment_steps;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
}

impl World for TabularWorld {
    fn num_states(&self) -> usize {
        self.next.len() / self.num_actions
    }

    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn num_features(&self) -> usize {
        self.num_features
    }

    fn next_state(&self, state: usize, action: usize) -> usize {
        self.next[state * self.num_actions + action]
    }

    fn features(&self, state: usize) -> &[f64] {
        &self.features[state * self.num_features..(state + 1) * self.num_features]
    }

    fn initial_state(&self) -> usize {
        self.initial
    }

    fn learning_steps(&self) -> usize {
        self.learning_steps
    }

    fn deployment_steps(&self) -> usize {
        self.deployment_steps
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }
}

use serde::{Deserialize, Serialize};

use super::World;
use crate::error::{Error, Result};

/// Alternating state/action sequence with its accumulated features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    states: Vec<usize>,
    actions: Vec<usize>,
    feature_sum: Vec<f64>,
}

impl Trajectory {
    /// The length-zero trajectory sitting at `start`.
    pub fn start<W: World + ?Sized>(world: &W, start: usize) -> Result<Self> {
        if start >= world.num_states() {
            return Err(Error::input(format!("start state {start} out of range")));
        }
        Ok(Trajectory {
            states: vec![start],
            actions: Vec::new(),
            feature_sum: world.features(start).to_vec(),
        })
    }

    /// Roll `actions` forward from `start`.
    pub fn rollout<W: World + ?Sized>(world: &W, start: usize, actions: &[usize]) -> Result<Self> {
        let mut tau = Self::start(world, start)?;
        for &a in actions {
            tau.push(world, a)?;
        }
        Ok(tau)
    }

    /// Validate an observed state/action sequence against the transition model.
    pub fn from_parts<W: World + ?Sized>(
        world: &W,
        states: Vec<usize>,
        actions: Vec<usize>,
    ) -> Result<Self> {
        if states.len() != actions.len() + 1 {
            return Err(Error::input(format!(
                "{} states cannot interleave {} actions",
                states.len(),
                actions.len()
            )));
        }
        let tau = Self::rollout(world, states[0], &actions)?;
        if tau.states != states {
            return Err(Error::input(
                "trajectory is inconsistent with the transition model",
            ));
        }
        Ok(tau)
    }

    pub fn push<W: World + ?Sized>(&mut self, world: &W, action: usize) -> Result<usize> {
        if action >= world.num_actions() {
            return Err(Error::input(format!("action {action} out of range")));
        }
        let next = world.next_state(self.last_state(), action);
        self.states.push(next);
        self.actions.push(action);
        for (acc, f) in self.feature_sum.iter_mut().zip(world.features(next)) {
            *acc += f;
        }
        Ok(next)
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    /// Number of actions taken.
    pub fn steps(&self) -> usize {
        self.actions.len()
    }

    pub fn first_state(&self) -> usize {
        self.states[0]
    }

    pub fn last_state(&self) -> usize {
        *self.states.last().expect("trajectory holds at least one state")
    }

    /// Sum of the feature rows of every visited state, start included.
    pub fn features(&self) -> &[f64] {
        &self.feature_sum
    }

    pub fn reward(&self, theta: &super::RewardParams) -> f64 {
        super::dot(&self.feature_sum, theta.as_slice())
    }

    /// Prefix containing the first `steps` actions.
    pub fn prefix<W: World + ?Sized>(&self, world: &W, steps: usize) -> Result<Self> {
        if steps > self.steps() {
            return Err(Error::input("prefix longer than trajectory"));
        }
        Self::rollout(world, self.states[0], &self.actions[..steps])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GameConfig;
    use crate::game::{Action, Cell, GridWorld};
    use proptest::prelude::*;

    fn world() -> GridWorld {
        let config = GameConfig {
            grid_size: 5,
            rbf_bandwidth: 1.2,
            ..GameConfig::default()
        };
        GridWorld::with_centers(config, vec![Cell::new(0, 1), Cell::new(3, 4), Cell::new(2, 2)])
            .unwrap()
    }

    #[test]
    fn single_state_features() {
        let w = world();
        let tau = Trajectory::start(&w, 7).unwrap();
        assert_eq!(tau.features(), w.feature_vector(7).unwrap());
    }

    #[test]
    fn staying_repeats_features() {
        let w = world();
        let s = w.initial_state();
        let stay = Action::Stay.index();
        let tau = Trajectory::rollout(&w, s, &[stay; 6]).unwrap();
        for (k, v) in tau.features().iter().enumerate() {
            assert!((v - 7.0 * w.features(s)[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_states_rejected() {
        let w = world();
        let s = w.initial_state();
        let err = Trajectory::from_parts(&w, vec![s, s], vec![Action::North.index()]);
        assert!(err.is_err());
        assert!(Trajectory::from_parts(&w, vec![s], vec![0]).is_err());
        assert!(Trajectory::rollout(&w, s, &[5]).is_err());
    }

    #[test]
    fn permuting_centers_permutes_features() {
        let w = world();
        let mut centers = w.feature_map().centers().to_vec();
        centers.rotate_left(1);
        let w2 = GridWorld::with_centers(w.config().clone(), centers).unwrap();
        let acts = [0, 2, 2, 1, 4, 3];
        let a = Trajectory::rollout(&w, w.initial_state(), &acts).unwrap();
        let b = Trajectory::rollout(&w2, w2.initial_state(), &acts).unwrap();
        let mut rotated = a.features().to_vec();
        rotated.rotate_left(1);
        assert_eq!(rotated, b.features());
    }

    proptest! {
        #[test]
        fn features_add_under_concatenation(
            first in proptest::collection::vec(0usize..5, 0..8),
            second in proptest::collection::vec(0usize..5, 0..8),
        ) {
            let w = world();
            let a = Trajectory::rollout(&w, w.initial_state(), &first).unwrap();
            let b = Trajectory::rollout(&w, a.last_state(), &second).unwrap();
            let mut all = first.clone();
            all.extend(&second);
            let joined = Trajectory::rollout(&w, w.initial_state(), &all).unwrap();
            let junction = w.features(a.last_state());
            for k in 0..w.num_features() {
                let expected = a.features()[k] + b.features()[k] - junction[k];
                prop_assert!((joined.features()[k] - expected).abs() < 1e-9);
            }
        }
    }
}

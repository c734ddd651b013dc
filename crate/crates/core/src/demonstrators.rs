//! Learning-phase policies for the human: expert and instructive demonstrations.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::belief::{Belief, LikelihoodCache};
use crate::episode::{run_episode, DemoPolicy};
use crate::error::{Error, Result};
use crate::game::{check_theta, dot, sample_uniform_theta, RewardParams, Trajectory, World};
use crate::planning::{occupancy_and_features, soft_value_iteration, value_iteration};
use crate::seed::{derive_seed, rng_from_seed};

/// Default candidate grid for eta cross-validation.
pub const DEFAULT_ETA_CANDIDATES: [f64; 6] = [0.0, 0.1, 0.3, 1.0, 3.0, 10.0];

pub const DEFAULT_BEAM_WIDTH: usize = 128;

/// Reward-maximizing demonstration: roll out the optimal plan over the
/// learning phase from the initial state.
pub fn expert_demo<W: World + ?Sized>(world: &W, theta: &RewardParams) -> Result<Trajectory> {
    let plan = value_iteration(world, theta, world.learning_steps())?;
    plan.rollout(world, world.initial_state())
}

/// Expected feature counts of the MaxEnt demonstrator for `(theta, lambda)`.
pub fn target_features<W: World + ?Sized>(world: &W, theta: &RewardParams, lambda: f64) -> Result<Vec<f64>> {
    let steps = world.learning_steps();
    let plan = soft_value_iteration(world, theta, lambda, steps)?;
    Ok(occupancy_and_features(world, plan.policy(), world.initial_state(), steps)?.expected_features)
}

/// Score `theta . phi(tau) - eta * ||phi_target - phi(tau)||^2` of a demonstration.
#[derive(Debug, Clone)]
pub struct DemoObjective {
    pub theta: RewardParams,
    pub target_features: Vec<f64>,
    pub eta: f64,
    /// Expected features accumulated up to each step; guides beam pruning.
    prefix_targets: Option<Vec<Vec<f64>>>,
}

impl DemoObjective {
    /// Objective whose target is the MaxEnt feature expectation at `lambda`.
    pub fn new<W: World + ?Sized>(world: &W, theta: &RewardParams, lambda: f64, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        let steps = world.learning_steps();
        let plan = soft_value_iteration(world, theta, lambda, steps)?;
        let occ = occupancy_and_features(world, plan.policy(), world.initial_state(), steps)?;
        let prefix_targets = (0..=steps).map(|t| occ.prefix_features(world, t)).collect();
        Ok(DemoObjective {
            theta: theta.clone(),
            target_features: occ.expected_features,
            eta,
            prefix_targets: Some(prefix_targets),
        })
    }

    /// Objective with an explicit target; prefixes are scored against a
    /// proportional share of it.
    pub fn with_target(theta: RewardParams, target_features: Vec<f64>, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        if theta.len() != target_features.len() {
            return Err(Error::input("target features and theta differ in length"));
        }
        Ok(DemoObjective {
            theta,
            target_features,
            eta,
            prefix_targets: None,
        })
    }

    pub fn score_features(&self, phi: &[f64]) -> f64 {
        dot(phi, self.theta.as_slice()) - self.eta * sq_dist(&self.target_features, phi)
    }

    pub fn score(&self, tau: &Trajectory) -> f64 {
        self.score_features(tau.features())
    }

    fn prefix_score(&self, phi: &[f64], t: usize, steps: usize) -> f64 {
        if t == steps {
            return self.score_features(phi);
        }
        let penalty = match &self.prefix_targets {
            Some(prefixes) => sq_dist(&prefixes[t], phi),
            None => {
                let share = (t + 1) as f64 / (steps + 1) as f64;
                self.target_features
                    .iter()
                    .zip(phi)
                    .map(|(g, p)| (share * g - p).powi(2))
                    .sum()
            }
        };
        dot(phi, self.theta.as_slice()) - self.eta * penalty
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::input(format!("eta must be finite and nonnegative, got {eta}")));
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchWidth {
    Beam(usize),
    Exhaustive,
}

impl Default for SearchWidth {
    fn default() -> Self {
        SearchWidth::Beam(DEFAULT_BEAM_WIDTH)
    }
}

/// Partial demonstration during search. Features are summed over the
/// sorted visit list so that equivalent prefixes score bit-identically.
#[derive(Clone)]
struct Node {
    state: usize,
    actions: Vec<usize>,
    visits: Vec<usize>,
    score: f64,
}

fn canonical_features<W: World + ?Sized>(world: &W, visits: &[usize]) -> Vec<f64> {
    let mut phi = vec![0.0; world.num_features()];
    for &s in visits {
        for (acc, f) in phi.iter_mut().zip(world.features(s)) {
            *acc += f;
        }
    }
    phi
}

fn extend<W: World + ?Sized>(world: &W, node: &Node, action: usize) -> (usize, Vec<usize>) {
    let next = world.next_state(node.state, action);
    let mut visits = node.visits.clone();
    let pos = visits.partition_point(|&v| v <= next);
    visits.insert(pos, next);
    (next, visits)
}

/// Instructive demonstration: the trajectory over the learning phase that
/// maximizes the objective, found by beam search or exhaustive enumeration.
/// Ties go to the lexicographically smallest action sequence.
pub fn instructive_demo<W: World + ?Sized>(
    world: &W,
    objective: &DemoObjective,
    search: SearchWidth,
) -> Result<Trajectory> {
    check_theta(world, &objective.theta)?;
    if objective.target_features.len() != world.num_features() {
        return Err(Error::input("target features do not match the world"));
    }
    let steps = world.learning_steps();
    let actions = match search {
        SearchWidth::Beam(0) => return Err(Error::input("search width must be at least 1")),
        SearchWidth::Beam(width) => beam_search(world, objective, steps, width),
        SearchWidth::Exhaustive => exhaustive_search(world, objective, steps),
    };
    Trajectory::rollout(world, world.initial_state(), &actions)
}

fn beam_search<W: World + ?Sized>(world: &W, objective: &DemoObjective, steps: usize, width: usize) -> Vec<usize> {
    let start = world.initial_state();
    let visits = vec![start];
    let phi = canonical_features(world, &visits);
    let mut beam = vec![Node {
        state: start,
        actions: Vec::new(),
        score: objective.prefix_score(&phi, 0, steps),
        visits,
    }];
    for t in 1..=steps {
        let mut candidates = Vec::with_capacity(beam.len() * world.num_actions());
        for node in &beam {
            for a in 0..world.num_actions() {
                let (state, visits) = extend(world, node, a);
                let phi = canonical_features(world, &visits);
                let mut actions = node.actions.clone();
                actions.push(a);
                candidates.push(Node {
                    state,
                    score: objective.prefix_score(&phi, t, steps),
                    actions,
                    visits,
                });
            }
        }
        candidates.sort_by(|x, y| y.score.total_cmp(&x.score).then_with(|| x.actions.cmp(&y.actions)));
        let mut seen = HashSet::new();
        beam = candidates
            .into_iter()
            .filter(|n| seen.insert((n.state, n.visits.clone())))
            .take(width)
            .collect();
    }
    beam.swap_remove(0).actions
}

fn exhaustive_search<W: World + ?Sized>(world: &W, objective: &DemoObjective, steps: usize) -> Vec<usize> {
    struct Search<'a, W: World + ?Sized> {
        world: &'a W,
        objective: &'a DemoObjective,
        steps: usize,
        best: Option<(f64, Vec<usize>)>,
    }

    impl<W: World + ?Sized> Search<'_, W> {
        fn visit(&mut self, state: usize, actions: &mut Vec<usize>, visits: &mut Vec<usize>) {
            if actions.len() == self.steps {
                let mut sorted = visits.clone();
                sorted.sort_unstable();
                let score = self
                    .objective
                    .score_features(&canonical_features(self.world, &sorted));
                if self.best.as_ref().map_or(true, |(b, _)| score > *b) {
                    self.best = Some((score, actions.clone()));
                }
                return;
            }
            for a in 0..self.world.num_actions() {
                let next = self.world.next_state(state, a);
                actions.push(a);
                visits.push(next);
                self.visit(next, actions, visits);
                visits.pop();
                actions.pop();
            }
        }
    }

    let start = world.initial_state();
    let mut search = Search {
        world,
        objective,
        steps,
        best: None,
    };
    search.visit(start, &mut Vec::new(), &mut vec![start]);
    search.best.expect("at least one trajectory").1
}

/// Pick the eta with the lowest mean deployment regret over training cases
/// drawn from `training_seeds`. Ties go to the smallest eta.
///
/// Each seed yields a ground-truth theta and a prior particle set of
/// `belief_samples` particles; the seeds must not overlap the evaluation set.
pub fn cross_validate_eta<W: World + ?Sized>(
    world: &W,
    candidates: &[f64],
    training_seeds: &[u64],
    lambda: f64,
    belief_samples: usize,
    search: SearchWidth,
) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::input("eta candidate list is empty"));
    }
    for &eta in candidates {
        check_eta(eta)?;
    }
    if candidates.len() == 1 {
        return Ok(candidates[0]);
    }
    if training_seeds.is_empty() {
        return Err(Error::input("cross-validation needs at least one training seed"));
    }
    let cases = training_seeds
        .par_iter()
        .map(|&seed| {
            let theta = sample_uniform_theta(world.num_features(), &mut rng_from_seed(derive_seed(seed, "cv-theta", 0)));
            let mut rng = rng_from_seed(derive_seed(seed, "cv-belief", 0));
            let prior = Belief::from_particles(
                (0..belief_samples)
                    .map(|_| sample_uniform_theta(world.num_features(), &mut rng))
                    .collect(),
            )?;
            let cache = LikelihoodCache::new(world, &prior, lambda, world.learning_steps())?;
            Ok((theta, prior, cache))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sorted: Vec<f64> = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean_regrets = sorted
        .par_iter()
        .map(|&eta| {
            let policy = DemoPolicy::Instructive { eta, search };
            let regrets = cases
                .iter()
                .map(|(theta, prior, cache)| {
                    run_episode(world, theta, policy, prior, cache).map(|o| o.eval.regret)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(regrets.iter().sum::<f64>() / regrets.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut best = 0;
    for (i, r) in mean_regrets.iter().enumerate() {
        if *r < mean_regrets[best] {
            best = i;
        }
    }
    Ok(sorted[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GameConfig;
    use crate::game::{Action, Cell, GridWorld};
    use crate::seed::rng_from_seed;

    fn grid(n: usize, steps: usize, centers: Vec<Cell>, bw: f64) -> GridWorld {
        let config = GameConfig {
            grid_size: n,
            learning_steps: steps,
            horizon_total: 2 * steps,
            rbf_bandwidth: bw,
            ..GameConfig::default()
        };
        GridWorld::with_centers(config, centers).unwrap()
    }

    #[test]
    fn expert_walks_to_the_bump_and_stays() {
        let w = grid(7, 8, vec![Cell::new(0, 6)], 1.5);
        let tau = expert_demo(&w, &RewardParams(vec![1.0])).unwrap();
        let goal = w.state_of(Cell::new(0, 6)).unwrap();
        // Start (3,3): Manhattan distance 6 to the corner.
        let arrival = tau.states().iter().position(|&s| s == goal).unwrap();
        assert_eq!(arrival, 6);
        assert!(tau.states()[arrival..].iter().all(|&s| s == goal));
    }

    #[test]
    fn zero_theta_expert_takes_first_action() {
        let w = grid(5, 4, vec![Cell::new(0, 0)], 1.0);
        let tau = expert_demo(&w, &RewardParams(vec![0.0])).unwrap();
        assert!(tau.actions().iter().all(|&a| a == Action::North.index()));
    }

    #[test]
    fn zero_lambda_target_is_uniform_walk() {
        let w = grid(5, 4, vec![Cell::new(0, 0), Cell::new(4, 4)], 1.0);
        let target = target_features(&w, &RewardParams(vec![0.8, -0.3]), 0.0).unwrap();
        let policy = crate::planning::PolicyTable::uniform(&w, 4);
        let occ = occupancy_and_features(&w, &policy, w.initial_state(), 4).unwrap();
        for (a, b) in target.iter().zip(&occ.expected_features) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn target_depends_only_on_lambda_theta_product() {
        let w = grid(5, 4, vec![Cell::new(0, 0), Cell::new(4, 4)], 1.0);
        let theta = RewardParams(vec![0.8, -0.3]);
        let a = target_features(&w, &theta, 3.0).unwrap();
        let b = target_features(&w, &theta.scaled(2.0), 1.5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_eta_recovers_reward_optimal_trajectory() {
        let w = grid(6, 6, vec![Cell::new(0, 0), Cell::new(5, 4)], 1.3);
        let theta = RewardParams(vec![0.4, 0.9]);
        let objective = DemoObjective::new(&w, &theta, 1.0, 0.0).unwrap();
        let br = instructive_demo(&w, &objective, SearchWidth::Beam(64)).unwrap();
        let expert = expert_demo(&w, &theta).unwrap();
        assert!((br.reward(&theta) - expert.reward(&theta)).abs() < 1e-9);
    }

    #[test]
    fn beam_matches_exhaustive_on_small_grid() {
        let w = grid(3, 4, vec![Cell::new(0, 0), Cell::new(2, 1)], 1.0);
        let mut rng = rng_from_seed(8);
        for _ in 0..10 {
            let theta = sample_uniform_theta(2, &mut rng);
            let objective = DemoObjective::new(&w, &theta, 1.0, 1.0).unwrap();
            let beam = instructive_demo(&w, &objective, SearchWidth::Beam(1024)).unwrap();
            let full = instructive_demo(&w, &objective, SearchWidth::Exhaustive).unwrap();
            assert_eq!(beam.actions(), full.actions());
        }
    }

    #[test]
    fn zero_width_rejected() {
        let w = grid(3, 2, vec![Cell::new(0, 0)], 1.0);
        let objective = DemoObjective::with_target(RewardParams(vec![1.0]), vec![1.0], 1.0).unwrap();
        assert!(instructive_demo(&w, &objective, SearchWidth::Beam(0)).is_err());
        assert!(DemoObjective::with_target(RewardParams(vec![1.0]), vec![1.0], -1.0).is_err());
    }

    #[test]
    fn cross_validation_edge_cases() {
        let w = grid(4, 3, vec![Cell::new(0, 0), Cell::new(3, 3)], 1.0);
        assert!(cross_validate_eta(&w, &[], &[1], 1.0, 10, SearchWidth::Beam(8)).is_err());
        assert_eq!(
            cross_validate_eta(&w, &[0.7], &[], 1.0, 10, SearchWidth::Beam(8)).unwrap(),
            0.7
        );
        // One particle: the posterior never moves, so every eta ties.
        let eta = cross_validate_eta(&w, &[3.0, 0.3, 1.0], &[1, 2, 3], 1.0, 1, SearchWidth::Beam(8)).unwrap();
        assert_eq!(eta, 0.3);
    }
}

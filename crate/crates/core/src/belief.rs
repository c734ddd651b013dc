//! The robot's posterior over reward parameters.
//!
//! Particles are drawn once from the uniform prior and reweighted by the
//! maximum-entropy demonstration likelihood
//! `log p(tau | theta) = lambda theta . phi(tau) - log Z(theta, lambda)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::GameConfig;
use crate::error::{Error, Result};
use crate::game::{check_theta, sample_uniform_theta, state_rewards, RewardParams, Trajectory, World};
use crate::planning::log_partition;
use crate::seed::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    particles: Vec<RewardParams>,
    log_weights: Vec<f64>,
}

/// Serializable view of a belief.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSnapshot {
    pub particles: Vec<RewardParams>,
    pub weights: Vec<f64>,
    pub posterior_mean: RewardParams,
    pub map_index: usize,
}

/// Per-particle log-partitions for one `(lambda, steps)` pair.
///
/// Computing these dominates the cost of an update; holding on to them lets
/// several demonstrations be scored against the same particle set.
#[derive(Debug, Clone)]
pub struct LikelihoodCache {
    lambda: f64,
    steps: usize,
    log_partitions: Vec<f64>,
}

impl LikelihoodCache {
    pub fn new<W: World + ?Sized>(world: &W, belief: &Belief, lambda: f64, steps: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::input(format!("lambda must be finite and nonnegative, got {lambda}")));
        }
        let start = world.initial_state();
        let log_partitions = belief
            .particles
            .par_iter()
            .map(|theta| log_partition(world, theta, lambda, steps, start))
            .collect::<Result<Vec<_>>>()?;
        Ok(LikelihoodCache {
            lambda,
            steps,
            log_partitions,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn log_partitions(&self) -> &[f64] {
        &self.log_partitions
    }
}

impl Belief {
    /// `M` i.i.d. particles from the uniform prior, equally weighted.
    pub fn init(config: &GameConfig, rng: &mut Rng) -> Self {
        let particles = (0..config.belief_samples)
            .map(|_| sample_uniform_theta(config.num_features, rng))
            .collect();
        Self::from_particles(particles).expect("belief_samples is validated positive")
    }

    pub fn from_particles(particles: Vec<RewardParams>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::input("a belief needs at least one particle"));
        }
        let dim = particles[0].len();
        if particles.iter().any(|p| p.len() != dim) {
            return Err(Error::input("particles differ in dimension"));
        }
        let m = particles.len();
        Ok(Belief {
            particles,
            log_weights: vec![-(m as f64).ln(); m],
        })
    }

    pub fn point_mass(theta: RewardParams) -> Self {
        Self::from_particles(vec![theta]).expect("one particle")
    }

    /// Build from explicit log-weights; the result is normalized.
    pub fn with_log_weights(particles: Vec<RewardParams>, log_weights: Vec<f64>) -> Result<Self> {
        if particles.len() != log_weights.len() {
            return Err(Error::input("particle and weight counts differ"));
        }
        let mut b = Self::from_particles(particles)?;
        b.log_weights = log_weights;
        b.normalize()?;
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[RewardParams] {
        &self.particles
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    fn normalize(&mut self) -> Result<()> {
        let lse = crate::planning::log_sum_exp(self.log_weights.iter().copied());
        if !lse.is_finite() {
            return Err(Error::input("belief weights degenerate (all zero or non-finite)"));
        }
        for l in &mut self.log_weights {
            *l -= lse;
        }
        Ok(())
    }

    /// Bayes update on a full demonstration from the world's initial state.
    pub fn update<W: World + ?Sized>(&self, world: &W, tau: &Trajectory, lambda: f64) -> Result<Belief> {
        let cache = LikelihoodCache::new(world, self, lambda, tau.steps())?;
        self.update_with(world, tau, &cache)
    }

    /// Bayes update reusing precomputed log-partitions.
    pub fn update_with<W: World + ?Sized>(
        &self,
        world: &W,
        tau: &Trajectory,
        cache: &LikelihoodCache,
    ) -> Result<Belief> {
        if let Some(p) = self.particles.first() {
            check_theta(world, p)?;
        }
        if tau.first_state() != world.initial_state() {
            return Err(Error::input("demonstration must start at the initial state"));
        }
        // Revalidate against the transition model; a hand-built trajectory may lie.
        let tau = Trajectory::from_parts(world, tau.states().to_vec(), tau.actions().to_vec())?;
        if cache.steps != tau.steps() || cache.log_partitions.len() != self.len() {
            return Err(Error::input("likelihood cache does not match this belief and demonstration"));
        }
        if cache.lambda == 0.0 {
            // The likelihood no longer depends on theta.
            return Ok(self.clone());
        }
        let phi = tau.features();
        let lambda = cache.lambda;
        let log_weights = self
            .particles
            .iter()
            .zip(&self.log_weights)
            .zip(&cache.log_partitions)
            .map(|((theta, lw), log_z)| lw + lambda * crate::game::dot(theta.as_slice(), phi) - log_z)
            .collect();
        let mut next = Belief {
            particles: self.particles.clone(),
            log_weights,
        };
        next.normalize()?;
        Ok(next)
    }

    /// Weighted average of the particles.
    pub fn posterior_mean(&self) -> RewardParams {
        let dim = self.particles[0].len();
        let mut mean = vec![0.0; dim];
        for (p, lw) in self.particles.iter().zip(&self.log_weights) {
            let w = lw.exp();
            for (m, v) in mean.iter_mut().zip(p.as_slice()) {
                *m += w * v;
            }
        }
        RewardParams(mean)
    }

    /// Index of the heaviest particle; ties go to the lowest index.
    pub fn map_index(&self) -> usize {
        let mut best = 0;
        for (i, lw) in self.log_weights.iter().enumerate() {
            if *lw > self.log_weights[best] {
                best = i;
            }
        }
        best
    }

    pub fn map_estimate(&self) -> RewardParams {
        self.particles[self.map_index()].clone()
    }

    /// Particles sorted by weight, heaviest first, ties by index.
    pub fn top_particles(&self, k: usize) -> Vec<(usize, f64)> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.log_weights[b].total_cmp(&self.log_weights[a]).then(a.cmp(&b)));
        idx.into_iter().take(k).map(|i| (i, self.log_weights[i].exp())).collect()
    }

    pub fn effective_sample_size(&self) -> f64 {
        let sq: f64 = self.log_weights.iter().map(|l| (2.0 * l).exp()).sum();
        1.0 / sq
    }

    pub fn snapshot(&self) -> BeliefSnapshot {
        BeliefSnapshot {
            particles: self.particles.clone(),
            weights: self.weights(),
            posterior_mean: self.posterior_mean(),
            map_index: self.map_index(),
        }
    }
}

/// Per-state reward heatmap of `theta`, row-major over states.
pub fn reward_heatmap<W: World + ?Sized>(world: &W, theta: &RewardParams) -> Result<Vec<f64>> {
    state_rewards(world, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Cell, GridWorld, TabularWorld};
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;

    fn small_grid() -> GridWorld {
        let config = GameConfig {
            grid_size: 4,
            learning_steps: 3,
            horizon_total: 6,
            rbf_bandwidth: 1.0,
            belief_samples: 40,
            ..GameConfig::default()
        };
        GridWorld::with_centers(config, vec![Cell::new(0, 0), Cell::new(3, 3)]).unwrap()
    }

    #[test]
    fn single_particle_has_unit_weight() {
        let config = GameConfig {
            belief_samples: 1,
            ..GameConfig::default()
        };
        let b = Belief::init(&config, &mut rng_from_seed(1));
        assert_eq!(b.len(), 1);
        assert_eq!(b.weights(), vec![1.0]);
    }

    #[test]
    fn fresh_belief_mean_near_zero() {
        let config = GameConfig {
            belief_samples: 100_000,
            ..GameConfig::default()
        };
        let b = Belief::init(&config, &mut rng_from_seed(5));
        for v in b.posterior_mean().0 {
            assert!(v.abs() < 0.02, "{v}");
        }
    }

    #[test]
    fn same_seed_same_particles() {
        let config = GameConfig::default();
        let a = Belief::init(&config, &mut rng_from_seed(77));
        let b = Belief::init(&config, &mut rng_from_seed(77));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_lambda_is_identity() {
        let w = small_grid();
        let b = Belief::init(w.config(), &mut rng_from_seed(3));
        let tau = Trajectory::rollout(&w, w.initial_state(), &[0, 3, 3]).unwrap();
        let post = b.update(&w, &tau, 0.0).unwrap();
        assert_eq!(post, b);
        assert_eq!(post.map_index(), 0);
    }

    #[test]
    fn duplicate_particles_keep_equal_weights() {
        let w = small_grid();
        let t = RewardParams(vec![0.4, -0.2]);
        let b = Belief::from_particles(vec![t.clone(), RewardParams(vec![-0.9, 0.9]), t]).unwrap();
        let tau = Trajectory::rollout(&w, w.initial_state(), &[0, 0, 3]).unwrap();
        let post = b.update(&w, &tau, 2.5).unwrap();
        assert_eq!(post.log_weights()[0], post.log_weights()[2]);
    }

    #[test]
    fn update_rejects_bad_trajectories() {
        let w = small_grid();
        let b = Belief::init(w.config(), &mut rng_from_seed(3));
        let off_start = Trajectory::rollout(&w, 0, &[1, 1, 1]).unwrap();
        assert!(b.update(&w, &off_start, 1.0).is_err());
        let other = TabularWorld::chain(vec![vec![1.0, 0.0]; 16], w.initial_state()).unwrap();
        let forged = Trajectory::rollout(&other, w.initial_state(), &[1, 1, 1]).unwrap();
        assert!(b.update(&w, &forged, 1.0).is_err());
    }

    #[test]
    fn posterior_mean_by_hand() {
        let b = Belief::with_log_weights(
            vec![RewardParams(vec![1.0]), RewardParams(vec![-1.0])],
            vec![0.25f64.ln(), 0.75f64.ln()],
        )
        .unwrap();
        assert!((b.posterior_mean().0[0] + 0.5).abs() < 1e-15);
        assert_eq!(b.map_index(), 1);
    }

    #[test]
    fn symmetric_particles_average_to_zero() {
        let t = RewardParams(vec![0.3, -0.7, 0.1]);
        let b = Belief::from_particles(vec![t.clone(), t.scaled(-1.0)]).unwrap();
        assert!(b.posterior_mean().0.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn uniform_on_lower_third_has_mean_one_sixth() {
        // Posterior after seeing the (0,2) message under thresholds (1/3, 2/3).
        let k = 30_000;
        let particles = (0..k)
            .map(|i| RewardParams(vec![(i as f64 + 0.5) / k as f64 / 3.0]))
            .collect();
        let b = Belief::from_particles(particles).unwrap();
        assert!((b.posterior_mean().0[0] - 1.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn snapshot_serializes() {
        let b = Belief::from_particles(vec![RewardParams(vec![0.5]), RewardParams(vec![-0.5])]).unwrap();
        let snap = b.snapshot();
        assert_eq!(snap.weights, vec![0.5, 0.5]);
        assert_eq!(snap.map_index, 0);
    }

    proptest! {
        #[test]
        fn normalization_ignores_constant_shifts(
            lw in proptest::collection::vec(-20.0f64..20.0, 1..12),
            shift in -500.0f64..500.0,
        ) {
            let particles: Vec<_> = (0..lw.len()).map(|i| RewardParams(vec![i as f64 / 12.0])).collect();
            let a = Belief::with_log_weights(particles.clone(), lw.clone()).unwrap();
            let b = Belief::with_log_weights(particles, lw.iter().map(|l| l + shift).collect()).unwrap();
            for (x, y) in a.weights().iter().zip(b.weights()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert!((a.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn mean_commutes_with_linear_maps(
            seed in 0u64..1000,
            m in proptest::array::uniform4(-2.0f64..2.0),
        ) {
            let mut rng = rng_from_seed(seed);
            let particles: Vec<_> = (0..8).map(|_| sample_uniform_theta(2, &mut rng)).collect();
            let lw: Vec<f64> = (0..8).map(|i| (i as f64 * 0.37).sin()).collect();
            let apply = |p: &RewardParams| RewardParams(vec![
                m[0] * p.0[0] + m[1] * p.0[1],
                m[2] * p.0[0] + m[3] * p.0[1],
            ]);
            let a = Belief::with_log_weights(particles.clone(), lw.clone()).unwrap();
            let b = Belief::with_log_weights(particles.iter().map(apply).collect(), lw).unwrap();
            let lhs = apply(&a.posterior_mean());
            let rhs = b.posterior_mean();
            for k in 0..2 {
                prop_assert!((lhs.0[k] - rhs.0[k]).abs() < 1e-9);
            }
        }
    }
}

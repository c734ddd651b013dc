//! Session state machine, independent of the HTTP layer.

use cirl_core::belief::{reward_heatmap, Belief, LikelihoodCache};
use cirl_core::episode::score_demonstration;
use cirl_core::game::sample_theta;
use cirl_core::planning::value_iteration;
use cirl_core::seed::{derive_seed, rng_from_seed};
use cirl_core::{Action, GameConfig, GridWorld, RewardParams, Trajectory, World};
use rand::Rng as _;

use crate::api::{
    BeliefKind, BeliefSummary, CreateSessionRequest, DeploymentReport, Event, ParticleWeight, Phase, Scorecard,
    SessionDescriptor, SessionView, StepReport,
};
use crate::error::ApiError;

const TOP_PARTICLES: usize = 5;

/// Bounds on client-supplied sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_grid_size: usize,
    pub max_horizon: usize,
    pub max_belief_samples: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_grid_size: 32,
            max_horizon: 100,
            max_belief_samples: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    request: CreateSessionRequest,
    world: GridWorld,
    theta_gt: RewardParams,
    prior: Belief,
    demo: Trajectory,
    actions: Vec<Action>,
    committed: Option<(Belief, LikelihoodCache)>,
    belief: BeliefSummary,
    deployment: Option<DeploymentReport>,
    phase: Phase,
    events: Vec<Event>,
}

fn lengths_match(field: &str, expected: usize, got: usize) -> Result<(), ApiError> {
    if expected != got {
        return Err(ApiError::invalid(
            Some(field),
            format!("expected {expected} components, got {got}"),
        ));
    }
    Ok(())
}

fn check_limits(config: &GameConfig, limits: &Limits) -> Result<(), ApiError> {
    if config.grid_size > limits.max_grid_size {
        return Err(ApiError::invalid(
            Some("grid_size"),
            format!("at most {} allowed", limits.max_grid_size),
        ));
    }
    if config.horizon_total > limits.max_horizon {
        return Err(ApiError::invalid(
            Some("horizon_total"),
            format!("at most {} allowed", limits.max_horizon),
        ));
    }
    if config.belief_samples > limits.max_belief_samples {
        return Err(ApiError::invalid(
            Some("belief_samples"),
            format!("at most {} allowed", limits.max_belief_samples),
        ));
    }
    if config.deployment_steps() == 0 {
        return Err(ApiError::invalid(
            Some("learning_steps"),
            "must leave at least one deployment step",
        ));
    }
    Ok(())
}

fn finite_vector(field: &str, v: &[f64]) -> Result<RewardParams, ApiError> {
    RewardParams::in_support(v.to_vec()).map_err(|e| ApiError::invalid(Some(field), e.to_string()))
}

impl Session {
    pub fn create(id: String, request: CreateSessionRequest, limits: &Limits) -> Result<Self, ApiError> {
        let mut config = request.config.apply_to(&GameConfig::default())?;
        if let Some(centers) = &request.centers {
            config.num_features = centers.len();
            config.validate()?;
        }
        check_limits(&config, limits)?;
        let world = match &request.centers {
            Some(centers) => GridWorld::with_centers(config.clone(), centers.clone())?,
            None => GridWorld::new(config.clone())?,
        };
        let nf = world.num_features();
        let theta_gt = match &request.theta_gt {
            Some(t) => {
                lengths_match("theta_gt", nf, t.len())?;
                finite_vector("theta_gt", t)?
            }
            None => sample_theta(&config, &mut rng_from_seed(derive_seed(config.seed, "theta", 0))),
        };
        let prior = match &request.belief_particles {
            Some(ps) => {
                if ps.is_empty() || ps.len() > limits.max_belief_samples {
                    return Err(ApiError::invalid(
                        Some("belief_particles"),
                        format!("between 1 and {} particles required", limits.max_belief_samples),
                    ));
                }
                let particles = ps
                    .iter()
                    .map(|p| {
                        lengths_match("belief_particles", nf, p.len())?;
                        finite_vector("belief_particles", p)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Belief::from_particles(particles)?
            }
            None => Belief::init(&config, &mut rng_from_seed(derive_seed(config.seed, "belief", 0))),
        };
        let demo = Trajectory::start(&world, world.initial_state())?;
        let belief = summarize(&world, &prior, BeliefKind::Prior, 0)?;
        Ok(Session {
            id,
            events: vec![Event::Create {
                request: request.clone(),
            }],
            request,
            world,
            theta_gt,
            prior,
            demo,
            actions: Vec::new(),
            committed: None,
            belief,
            deployment: None,
            phase: Phase::Learning,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn world(&self) -> &GridWorld {
        &self.world
    }

    pub fn theta_gt(&self) -> &RewardParams {
        &self.theta_gt
    }

    pub fn prior(&self) -> &Belief {
        &self.prior
    }

    pub fn demonstration(&self) -> &Trajectory {
        &self.demo
    }

    /// The posterior committed at the end of the learning phase.
    pub fn committed_belief(&self) -> Option<&Belief> {
        self.committed.as_ref().map(|(b, _)| b)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn descriptor(&self) -> Result<SessionDescriptor, ApiError> {
        let config = self.world.config().clone();
        let initial_state = self.world.initial_state();
        Ok(SessionDescriptor {
            id: self.id.clone(),
            phase: self.phase.clone(),
            grid_size: config.grid_size,
            num_features: self.world.num_features(),
            centers: self.world.feature_map().centers().to_vec(),
            bandwidth: config.rbf_bandwidth,
            learning_steps: config.learning_steps,
            deployment_steps: config.deployment_steps(),
            initial_state,
            initial_cell: self.world.cell_of(initial_state),
            theta_gt: self.theta_gt.clone(),
            ground_truth_heatmap: reward_heatmap(&self.world, &self.theta_gt)?,
            config,
        })
    }

    fn steps_remaining(&self) -> usize {
        self.world.learning_steps() - self.demo.steps()
    }

    fn path(&self) -> Vec<cirl_core::Cell> {
        self.demo.states().iter().map(|&s| self.world.cell_of(s)).collect()
    }

    /// Advance the demonstration by one action and refresh the belief.
    ///
    /// Intermediate steps score the prefix under the likelihood truncated to
    /// its length and never touch the prior. The final step commits the
    /// full-length update on the whole demonstration.
    pub fn step(&mut self, action: Action) -> Result<StepReport, ApiError> {
        if self.phase != Phase::Learning {
            return Err(ApiError::wrong_phase("actions are accepted only in the learning phase"));
        }
        let mut demo = self.demo.clone();
        demo.push(&self.world, action.index())?;
        let steps = demo.steps();
        let lambda = self.world.config().lambda;
        let cache = LikelihoodCache::new(&self.world, &self.prior, lambda, steps)?;
        let posterior = self.prior.update_with(&self.world, &demo, &cache)?;
        let done = steps == self.world.learning_steps();
        let kind = if done {
            BeliefKind::Committed
        } else {
            BeliefKind::TruncatedPreview
        };
        let belief = summarize(&self.world, &posterior, kind, steps)?;

        self.demo = demo;
        self.actions.push(action);
        self.belief = belief;
        self.events.push(Event::Step { action });
        if done {
            self.committed = Some((posterior, cache));
            self.phase = Phase::Deployed;
        }
        let state = self.demo.last_state();
        Ok(StepReport {
            state,
            cell: self.world.cell_of(state),
            steps_taken: steps,
            steps_remaining: self.steps_remaining(),
            phase: self.phase.clone(),
            path: self.path(),
            belief: self.belief.clone(),
        })
    }

    /// Roll out the plan for the posterior mean from a seeded random start
    /// and score the committed posterior against the ground truth.
    pub fn deploy(&mut self) -> Result<DeploymentReport, ApiError> {
        if self.phase != Phase::Deployed {
            return Err(ApiError::wrong_phase(match self.phase {
                Phase::Learning => "the demonstration is not finished",
                _ => "the session is already closed",
            }));
        }
        let (_, cache) = self
            .committed
            .as_ref()
            .ok_or_else(|| ApiError::internal("deployed session without a committed belief"))?;
        let outcome = score_demonstration(&self.world, &self.theta_gt, self.demo.clone(), &self.prior, cache)?;
        let theta_hat = outcome.eval.theta_hat.clone();

        let seed = self.world.config().seed;
        let start_state = rng_from_seed(derive_seed(seed, "deploy", 0)).gen_range(0..self.world.num_states());
        let plan = value_iteration(&self.world, &theta_hat, self.world.deployment_steps())?;
        let rollout = plan.rollout(&self.world, start_state)?;

        let report = DeploymentReport {
            start_state,
            start_cell: self.world.cell_of(start_state),
            rollout: rollout.states().iter().map(|&s| self.world.cell_of(s)).collect(),
            theta_hat_heatmap: reward_heatmap(&self.world, &theta_hat)?,
            map_heatmap: reward_heatmap(&self.world, &outcome.posterior.map_estimate())?,
            theta_hat,
            scorecard: Scorecard {
                regret: outcome.eval.regret,
                kl: outcome.eval.kl,
                reward_l2: outcome.eval.reward_l2,
            },
            phase: Phase::Closed,
        };
        self.phase = Phase::Closed;
        self.deployment = Some(report.clone());
        self.events.push(Event::Deploy);
        Ok(report)
    }

    pub fn view(&self) -> Result<SessionView, ApiError> {
        Ok(SessionView {
            descriptor: self.descriptor()?,
            phase: self.phase.clone(),
            path: self.path(),
            actions: self.actions.clone(),
            steps_remaining: self.steps_remaining(),
            belief: self.belief.clone(),
            deployment: self.deployment.clone(),
            events: self.events.clone(),
        })
    }

    pub fn request(&self) -> &CreateSessionRequest {
        &self.request
    }
}

fn summarize<W: World + ?Sized>(
    world: &W,
    belief: &Belief,
    kind: BeliefKind,
    steps: usize,
) -> Result<BeliefSummary, ApiError> {
    let mean = belief.posterior_mean();
    Ok(BeliefSummary {
        kind,
        steps,
        mean_heatmap: reward_heatmap(world, &mean)?,
        map_heatmap: reward_heatmap(world, &belief.map_estimate())?,
        posterior_mean: mean,
        top_particles: belief
            .top_particles(TOP_PARTICLES)
            .into_iter()
            .map(|(index, weight)| ParticleWeight {
                index,
                weight,
                theta: belief.particles()[index].clone(),
            })
            .collect(),
        effective_sample_size: belief.effective_sample_size(),
    })
}

/// Rebuild a session from its event log.
pub fn replay(id: String, events: &[Event], limits: &Limits) -> Result<Session, ApiError> {
    let mut iter = events.iter();
    let mut session = match iter.next() {
        Some(Event::Create { request }) => Session::create(id, request.clone(), limits)?,
        _ => return Err(ApiError::invalid(Some("events"), "the log must open with a create event")),
    };
    for event in iter {
        match event {
            Event::Create { .. } => {
                return Err(ApiError::invalid(Some("events"), "create may appear only once"));
            }
            Event::Step { action } => {
                session.step(*action)?;
            }
            Event::Deploy => {
                session.deploy()?;
            }
        }
    }
    Ok(session)
}

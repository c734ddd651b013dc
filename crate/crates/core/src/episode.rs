//! One learning-plus-deployment round of the apprenticeship game.

use serde::{Deserialize, Serialize};

use crate::belief::{Belief, LikelihoodCache};
use crate::demonstrators::{expert_demo, instructive_demo, DemoObjective, SearchWidth};
use crate::error::Result;
use crate::game::{RewardParams, Trajectory, World};
use crate::metrics::{evaluate, EvalResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DemoPolicy {
    Expert,
    Instructive { eta: f64, search: SearchWidth },
}

impl DemoPolicy {
    pub fn label(&self) -> PolicyLabel {
        match self {
            DemoPolicy::Expert => PolicyLabel::Expert,
            DemoPolicy::Instructive { .. } => PolicyLabel::Br,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyLabel {
    Expert,
    Br,
}

impl std::fmt::Display for PolicyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PolicyLabel::Expert => "expert",
            PolicyLabel::Br => "br",
        })
    }
}

impl std::str::FromStr for PolicyLabel {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expert" => Ok(PolicyLabel::Expert),
            "br" => Ok(PolicyLabel::Br),
            other => Err(crate::error::Error::InvalidInput(format!("unknown policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub demo: Trajectory,
    pub posterior: Belief,
    pub eval: EvalResult,
}

/// Produce the human's demonstration for `theta_gt`.
pub fn demonstrate<W: World + ?Sized>(
    world: &W,
    theta_gt: &RewardParams,
    policy: DemoPolicy,
    lambda: f64,
) -> Result<Trajectory> {
    match policy {
        DemoPolicy::Expert => expert_demo(world, theta_gt),
        DemoPolicy::Instructive { eta, search } => {
            let objective = DemoObjective::new(world, theta_gt, lambda, eta)?;
            instructive_demo(world, &objective, search)
        }
    }
}

/// Demonstrate, update the prior on the demonstration, deploy the plan for
/// the posterior mean and score it. `cache` fixes lambda.
pub fn run_episode<W: World + ?Sized>(
    world: &W,
    theta_gt: &RewardParams,
    policy: DemoPolicy,
    prior: &Belief,
    cache: &LikelihoodCache,
) -> Result<EpisodeOutcome> {
    let demo = demonstrate(world, theta_gt, policy, cache.lambda())?;
    score_demonstration(world, theta_gt, demo, prior, cache)
}

/// Update the prior on a given demonstration and score the posterior mean.
pub fn score_demonstration<W: World + ?Sized>(
    world: &W,
    theta_gt: &RewardParams,
    demo: Trajectory,
    prior: &Belief,
    cache: &LikelihoodCache,
) -> Result<EpisodeOutcome> {
    let posterior = prior.update_with(world, &demo, cache)?;
    let eval = evaluate(world, theta_gt, &posterior.posterior_mean(), cache.lambda())?;
    Ok(EpisodeOutcome { demo, posterior, eval })
}

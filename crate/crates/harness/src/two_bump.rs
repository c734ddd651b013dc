//! Scripted two-bump comparison: a reward with a strong and a weaker bump on
//! either side of the start, taught once by each demonstrator.

use std::path::Path;

use cirl_core::belief::{reward_heatmap, Belief, LikelihoodCache};
use cirl_core::demonstrators::SearchWidth;
use cirl_core::episode::{run_episode, DemoPolicy, EpisodeOutcome, PolicyLabel};
use cirl_core::seed::{derive_seed, rng_from_seed};
use cirl_core::{Cell, Eta, GameConfig, GridWorld, RewardParams, World};
use serde::Serialize;

use crate::error::Result;
use crate::output::{self, HeatmapRow};

pub const HIGH_BUMP: Cell = Cell { row: 5, col: 3 };
pub const LOW_BUMP: Cell = Cell { row: 5, col: 7 };
pub const THETA: [f64; 2] = [1.0, 0.8];
pub const LAMBDA: f64 = 1.0;
pub const ETA: f64 = 0.3;

pub fn config(seed: u64) -> GameConfig {
    GameConfig {
        num_features: 2,
        rbf_bandwidth: 1.0,
        lambda: LAMBDA,
        eta: Eta::Fixed(ETA),
        seed,
        ..GameConfig::default()
    }
}

pub fn world(seed: u64) -> Result<GridWorld> {
    Ok(GridWorld::with_centers(config(seed), vec![HIGH_BUMP, LOW_BUMP])?)
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoSummary {
    pub policy: PolicyLabel,
    pub cells: Vec<Cell>,
    pub visits_high_bump: bool,
    pub visits_low_bump: bool,
    pub regret: f64,
    pub kl: f64,
    pub reward_l2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoBumpReport {
    pub grid_size: usize,
    pub theta: RewardParams,
    pub lambda: f64,
    pub eta: f64,
    pub expert: DemoSummary,
    pub br: DemoSummary,
}

fn summarize(world: &GridWorld, policy: PolicyLabel, outcome: &EpisodeOutcome) -> Result<DemoSummary> {
    let high = world.state_of(HIGH_BUMP)?;
    let low = world.state_of(LOW_BUMP)?;
    let states = outcome.demo.states();
    Ok(DemoSummary {
        policy,
        cells: states.iter().map(|&s| world.cell_of(s)).collect(),
        visits_high_bump: states.contains(&high),
        visits_low_bump: states.contains(&low),
        regret: outcome.eval.regret,
        kl: outcome.eval.kl,
        reward_l2: outcome.eval.reward_l2,
    })
}

/// Run both demonstrators on the scripted layout with a prior drawn from
/// `seed`; when `heatmap_path` is given, dump per-cell rewards there.
pub fn run_two_bump(seed: u64, heatmap_path: Option<&Path>) -> Result<TwoBumpReport> {
    let file = heatmap_path.map(output::create).transpose()?;
    let world = world(seed)?;
    let config = world.config().clone();
    let theta = RewardParams(THETA.to_vec());
    let prior = Belief::init(&config, &mut rng_from_seed(derive_seed(seed, "two-bump", 0)));
    let cache = LikelihoodCache::new(&world, &prior, LAMBDA, world.learning_steps())?;
    let expert = run_episode(&world, &theta, DemoPolicy::Expert, &prior, &cache)?;
    let br = run_episode(
        &world,
        &theta,
        DemoPolicy::Instructive {
            eta: ETA,
            search: SearchWidth::default(),
        },
        &prior,
        &cache,
    )?;
    if let Some(file) = file {
        let truth = reward_heatmap(&world, &theta)?;
        let mut rows = Vec::new();
        for (label, outcome) in [(PolicyLabel::Expert, &expert), (PolicyLabel::Br, &br)] {
            let map = reward_heatmap(&world, &outcome.posterior.map_estimate())?;
            let mean = reward_heatmap(&world, &outcome.posterior.posterior_mean())?;
            for s in 0..world.num_states() {
                let cell = world.cell_of(s);
                rows.push(HeatmapRow {
                    condition: "two-bump".into(),
                    policy: label,
                    theta_index: 0,
                    state: s,
                    row: cell.row,
                    col: cell.col,
                    map_reward: map[s],
                    mean_reward: mean[s],
                    true_reward: truth[s],
                });
            }
        }
        output::write_heatmaps(file, &rows)?;
    }
    Ok(TwoBumpReport {
        grid_size: world.grid_size(),
        theta,
        lambda: LAMBDA,
        eta: ETA,
        expert: summarize(&world, PolicyLabel::Expert, &expert)?,
        br: summarize(&world, PolicyLabel::Br, &br)?,
    })
}

//! Request and response bodies. Heatmaps are row-major, `grid_size^2` long.

use cirl_core::{Action, Cell, ConfigOverrides, GameConfig, RewardParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSessionRequest {
    #[serde(default)]
    pub config: ConfigOverrides,
    /// Ground truth for scripted demos; sampled from the prior when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_gt: Option<Vec<f64>>,
    /// Explicit prior particles with equal weight; one particle is a point mass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belief_particles: Option<Vec<Vec<f64>>>,
    /// Explicit feature centers; `config.num_features` follows their count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Learning,
    Deployed,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDescriptor {
    pub id: String,
    pub phase: Phase,
    pub config: GameConfig,
    pub grid_size: usize,
    pub num_features: usize,
    pub centers: Vec<Cell>,
    pub bandwidth: f64,
    pub learning_steps: usize,
    pub deployment_steps: usize,
    pub initial_state: usize,
    pub initial_cell: Cell,
    pub theta_gt: RewardParams,
    pub ground_truth_heatmap: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRequest {
    pub action: Action,
}

/// Whether a belief summary is a per-step preview or the committed posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeliefKind {
    /// Likelihood truncated to the partial demonstration's length.
    TruncatedPreview,
    /// Full-length likelihood on the completed demonstration.
    Committed,
    Prior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleWeight {
    pub index: usize,
    pub weight: f64,
    pub theta: RewardParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSummary {
    pub kind: BeliefKind,
    /// Demonstration steps the likelihood covers.
    pub steps: usize,
    pub posterior_mean: RewardParams,
    pub mean_heatmap: Vec<f64>,
    pub map_heatmap: Vec<f64>,
    pub top_particles: Vec<ParticleWeight>,
    pub effective_sample_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub state: usize,
    pub cell: Cell,
    pub steps_taken: usize,
    pub steps_remaining: usize,
    pub phase: Phase,
    pub path: Vec<Cell>,
    pub belief: BeliefSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scorecard {
    pub regret: f64,
    pub kl: f64,
    pub reward_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentReport {
    pub start_state: usize,
    pub start_cell: Cell,
    pub rollout: Vec<Cell>,
    pub theta_hat: RewardParams,
    pub theta_hat_heatmap: Vec<f64>,
    pub map_heatmap: Vec<f64>,
    pub scorecard: Scorecard,
    pub phase: Phase,
}

/// Everything a client needs to redraw a session or replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub descriptor: SessionDescriptor,
    pub phase: Phase,
    pub path: Vec<Cell>,
    pub actions: Vec<Action>,
    pub steps_remaining: usize,
    pub belief: BeliefSummary,
    pub deployment: Option<DeploymentReport>,
    pub events: Vec<Event>,
}

/// Replayable log entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Create { request: CreateSessionRequest },
    Step { action: Action },
    Deploy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

use cirl_core::episode::PolicyLabel;
use serde::{Deserialize, Serialize};

pub const RESULTS_HEADER: &str =
    "condition,policy,num_features,lambda,eta,theta_index,seed,regret,kl,reward_l2,wall_ms";

/// One evaluated episode. Field order is the results-file column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub condition: String,
    pub policy: PolicyLabel,
    pub num_features: usize,
    pub lambda: f64,
    pub eta: f64,
    pub theta_index: usize,
    /// Seed of the ground-truth sample; shared by both policies.
    pub seed: u64,
    pub regret: f64,
    pub kl: f64,
    pub reward_l2: f64,
    pub wall_ms: u64,
}

/// Deterministic merge order: feature level, lambda, condition, sample, policy.
pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        a.num_features
            .cmp(&b.num_features)
            .then(a.lambda.total_cmp(&b.lambda))
            .then_with(|| a.condition.cmp(&b.condition))
            .then(a.theta_index.cmp(&b.theta_index))
            .then(a.policy.cmp(&b.policy))
    });
}

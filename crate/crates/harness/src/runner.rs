//! Seeded episode jobs, the factorial and the rationality sweep.

use std::collections::HashSet;
use std::time::Instant;

use cirl_core::belief::{Belief, LikelihoodCache};
use cirl_core::demonstrators::{cross_validate_eta, SearchWidth, DEFAULT_ETA_CANDIDATES};
use cirl_core::episode::{self, DemoPolicy, PolicyLabel};
use cirl_core::game::sample_theta;
use cirl_core::metrics::EvalResult;
use cirl_core::seed::{derive_seed, rng_from_seed};
use cirl_core::{Eta, GameConfig, GridWorld, RewardParams, World};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::output::{self, ConditionSummary, HeatmapRow, PairedSummary, Summary, SweepRow};
use crate::record::{sort_records, RunRecord};
use crate::spec::{ExperimentSpec, DEFAULT_CV_SAMPLES};
use crate::stats::{mean, paired_test, std_error};

/// Seed of ground-truth sample `index` at a feature level. Shared by every
/// policy and every lambda, which is what pairs the conditions.
pub fn theta_seed(base: u64, num_features: usize, index: usize) -> u64 {
    derive_seed(base, &format!("theta/nf{num_features}"), index as u64)
}

pub fn belief_seed(base: u64, num_features: usize, index: usize) -> u64 {
    derive_seed(base, &format!("belief/nf{num_features}"), index as u64)
}

/// Training seeds for eta selection; drawn under their own label.
pub fn cv_seeds(base: u64, num_features: usize, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|j| derive_seed(base, &format!("cv/nf{num_features}"), j))
        .collect()
}

pub fn factorial_condition(num_features: usize) -> String {
    format!("nf{num_features}")
}

pub fn sweep_condition(num_features: usize, lambda: f64) -> String {
    format!("sweep/nf{num_features}/lambda{lambda}")
}

/// One ground-truth sample with its prior, identical across policies.
struct Case {
    index: usize,
    seed: u64,
    theta: RewardParams,
    prior: Belief,
}

fn make_case(config: &GameConfig, index: usize) -> Case {
    let seed = theta_seed(config.seed, config.num_features, index);
    let theta = sample_theta(config, &mut rng_from_seed(seed));
    let prior = Belief::init(config, &mut rng_from_seed(belief_seed(config.seed, config.num_features, index)));
    Case {
        index,
        seed,
        theta,
        prior,
    }
}

struct Layout<'a> {
    spec: &'a ExperimentSpec,
    world: GridWorld,
    condition: String,
    lambda: f64,
    eta: f64,
}

impl Layout<'_> {
    fn search(&self) -> SearchWidth {
        SearchWidth::Beam(self.spec.beam_width)
    }
}

fn resolve_eta(spec: &ExperimentSpec, world: &GridWorld, lambda: f64, num_samples: usize) -> Result<f64> {
    match world.config().eta {
        Eta::Fixed(eta) => Ok(eta),
        Eta::CrossValidate => {
            let base = world.config().seed;
            let n = world.num_features();
            let training = cv_seeds(base, n, spec.cv_samples);
            let eval: HashSet<u64> = (0..num_samples).map(|i| theta_seed(base, n, i)).collect();
            if training.iter().any(|s| eval.contains(s)) {
                return Err(HarnessError::Spec("cross-validation seeds overlap evaluation seeds".into()));
            }
            Ok(cross_validate_eta(
                world,
                &spec.eta_candidates,
                &training,
                lambda,
                world.config().belief_samples,
                SearchWidth::Beam(spec.beam_width),
            )?)
        }
    }
}

struct Episode {
    record: RunRecord,
    heatmap: Vec<HeatmapRow>,
}

fn run_case(layout: &Layout, case: &Case, policies: &[PolicyLabel], heatmaps: bool) -> Result<Vec<Episode>> {
    let world = &layout.world;
    let cache = LikelihoodCache::new(world, &case.prior, layout.lambda, world.learning_steps())?;
    let mut out = Vec::with_capacity(policies.len());
    for &label in policies {
        let policy = match label {
            PolicyLabel::Expert => DemoPolicy::Expert,
            PolicyLabel::Br => DemoPolicy::Instructive {
                eta: layout.eta,
                search: layout.search(),
            },
        };
        let started = Instant::now();
        let outcome = episode::run_episode(world, &case.theta, policy, &case.prior, &cache)?;
        let wall_ms = if layout.spec.record_wall_time {
            started.elapsed().as_millis() as u64
        } else {
            0
        };
        let heatmap = if heatmaps {
            heatmap_rows(layout, case, label, &outcome.posterior)?
        } else {
            Vec::new()
        };
        out.push(Episode {
            record: RunRecord {
                condition: layout.condition.clone(),
                policy: label,
                num_features: world.num_features(),
                lambda: layout.lambda,
                eta: layout.eta,
                theta_index: case.index,
                seed: case.seed,
                regret: outcome.eval.regret,
                kl: outcome.eval.kl,
                reward_l2: outcome.eval.reward_l2,
                wall_ms,
            },
            heatmap,
        });
    }
    Ok(out)
}

fn heatmap_rows(layout: &Layout, case: &Case, policy: PolicyLabel, posterior: &Belief) -> Result<Vec<HeatmapRow>> {
    let world = &layout.world;
    let map = cirl_core::belief::reward_heatmap(world, &posterior.map_estimate())?;
    let mean = cirl_core::belief::reward_heatmap(world, &posterior.posterior_mean())?;
    let truth = cirl_core::belief::reward_heatmap(world, &case.theta)?;
    Ok((0..world.num_states())
        .map(|s| {
            let cell = world.cell_of(s);
            HeatmapRow {
                condition: layout.condition.clone(),
                policy,
                theta_index: case.index,
                state: s,
                row: cell.row,
                col: cell.col,
                map_reward: map[s],
                mean_reward: mean[s],
                true_reward: truth[s],
            }
        })
        .collect())
}

fn run_layouts(
    spec: &ExperimentSpec,
    layouts: &[Layout],
    policies: &[PolicyLabel],
    heatmaps: bool,
) -> Result<(Vec<RunRecord>, Vec<HeatmapRow>)> {
    let jobs: Vec<(usize, usize)> = (0..layouts.len())
        .flat_map(|l| (0..spec.num_samples).map(move |i| (l, i)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(l, i)| {
            let layout = &layouts[l];
            let case = make_case(layout.world.config(), i);
            run_case(layout, &case, policies, heatmaps)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for ep in results.into_iter().flatten() {
        records.push(ep.record);
        rows.extend(ep.heatmap);
    }
    sort_records(&mut records);
    rows.sort_by(|a, b| {
        (a.condition.as_str(), a.theta_index, a.policy, a.state).cmp(&(
            b.condition.as_str(),
            b.theta_index,
            b.policy,
            b.state,
        ))
    });
    Ok((records, rows))
}

fn with_pool<T: Send>(spec: &ExperimentSpec, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Spec(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

fn factorial_layouts(spec: &ExperimentSpec) -> Result<Vec<Layout<'_>>> {
    spec.feature_levels
        .iter()
        .map(|&n| {
            let world = GridWorld::new(spec.base.with_num_features(n))?;
            let lambda = spec.base.lambda;
            let eta = resolve_eta(spec, &world, lambda, spec.num_samples)?;
            Ok(Layout {
                spec,
                world,
                condition: factorial_condition(n),
                lambda,
                eta,
            })
        })
        .collect()
}

fn sweep_layouts<'a>(spec: &'a ExperimentSpec, lambdas: &[f64]) -> Result<Vec<Layout<'a>>> {
    let mut layouts = Vec::new();
    for &n in &spec.feature_levels {
        let world = GridWorld::new(spec.base.with_num_features(n))?;
        for &lambda in lambdas {
            let eta = resolve_eta(spec, &world, lambda, spec.num_samples)?;
            layouts.push(Layout {
                spec,
                world: world.clone(),
                condition: sweep_condition(n, lambda),
                lambda,
                eta,
            });
        }
    }
    Ok(layouts)
}

#[derive(Debug, Clone)]
pub struct FactorialResult {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
    pub heatmaps: Vec<HeatmapRow>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<RunRecord>,
    pub table: Vec<SweepRow>,
}

/// Run every policy at every feature level on `num_samples` paired ground
/// truths, plus the lambda sweep when `spec.lambda_sweep` is set. Writes the results
/// CSV, the summary and the heatmap dump.
pub fn run_factorial(spec: &ExperimentSpec) -> Result<FactorialResult> {
    spec.validate()?;
    let results_file = output::create(&spec.output_path)?;
    let summary_file = output::create(&spec.summary_path())?;
    let heatmap_file = output::create(&spec.heatmap_path())?;

    let (mut records, heatmaps, sweep) = with_pool(spec, || {
        let layouts = factorial_layouts(spec)?;
        let (records, heatmaps) = run_layouts(spec, &layouts, &spec.policies, true)?;
        let sweep = match &spec.lambda_sweep {
            Some(lambdas) => Some(sweep_inner(spec, lambdas)?),
            None => None,
        };
        Ok((records, heatmaps, sweep))
    })?;

    let mut summary = Summary {
        conditions: condition_summaries(&records),
        paired: paired_summaries(&records),
        lambda_sweep: Vec::new(),
    };
    if let Some(sweep) = sweep {
        summary.lambda_sweep = sweep.table;
        records.extend(sweep.records);
    }
    output::write_records(results_file, &records)?;
    output::write_summary(summary_file, &summary)?;
    output::write_heatmaps(heatmap_file, &heatmaps)?;
    Ok(FactorialResult {
        records,
        summary,
        heatmaps,
    })
}

/// Instructive-policy regret for each lambda over the shared ground-truth
/// samples. Writes the sweep records and a summary holding the table.
pub fn run_lambda_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let lambdas = spec
        .lambda_sweep
        .as_ref()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| HarnessError::Spec("lambda_sweep must list at least one value".into()))?;
    let results_file = output::create(&spec.output_path)?;
    let summary_file = output::create(&spec.summary_path())?;
    let sweep = with_pool(spec, || sweep_inner(spec, lambdas))?;
    output::write_records(results_file, &sweep.records)?;
    output::write_summary(
        summary_file,
        &Summary {
            lambda_sweep: sweep.table.clone(),
            ..Summary::default()
        },
    )?;
    Ok(sweep)
}

fn sweep_inner(spec: &ExperimentSpec, lambdas: &[f64]) -> Result<SweepResult> {
    let layouts = sweep_layouts(spec, lambdas)?;
    let (records, _) = run_layouts(spec, &layouts, &[PolicyLabel::Br], false)?;
    let table = layouts
        .iter()
        .map(|layout| {
            let rows: Vec<&RunRecord> = records.iter().filter(|r| r.condition == layout.condition).collect();
            let regrets: Vec<f64> = rows.iter().map(|r| r.regret).collect();
            SweepRow {
                num_features: layout.world.num_features(),
                lambda: layout.lambda,
                eta: layout.eta,
                n: rows.len(),
                mean_regret: mean(&regrets),
                regret_std_error: std_error(&regrets),
                mean_kl: mean(&rows.iter().map(|r| r.kl).collect::<Vec<_>>()),
                mean_reward_l2: mean(&rows.iter().map(|r| r.reward_l2).collect::<Vec<_>>()),
            }
        })
        .collect();
    Ok(SweepResult { records, table })
}

fn condition_summaries(records: &[RunRecord]) -> Vec<ConditionSummary> {
    let mut keys: Vec<(String, PolicyLabel, usize, u64, u64)> = Vec::new();
    for r in records {
        let k = (r.condition.clone(), r.policy, r.num_features, r.lambda.to_bits(), r.eta.to_bits());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(condition, policy, num_features, lambda, eta)| {
            let rows: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.condition == condition && r.policy == policy)
                .collect();
            let avg = |f: fn(&RunRecord) -> f64| mean(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
            ConditionSummary {
                n: rows.len(),
                mean_regret: avg(|r| r.regret),
                mean_kl: avg(|r| r.kl),
                mean_reward_l2: avg(|r| r.reward_l2),
                condition,
                policy,
                num_features,
                lambda: f64::from_bits(lambda),
                eta: f64::from_bits(eta),
            }
        })
        .collect()
}

/// Paired expert-minus-instructive tests per condition and measure.
pub fn paired_summaries(records: &[RunRecord]) -> Vec<PairedSummary> {
    let mut conditions: Vec<(&str, usize)> = Vec::new();
    for r in records {
        if !conditions.iter().any(|(c, _)| *c == r.condition) {
            conditions.push((&r.condition, r.num_features));
        }
    }
    let mut out = Vec::new();
    for (condition, num_features) in conditions {
        let pick = |label: PolicyLabel| -> Vec<&RunRecord> {
            records
                .iter()
                .filter(|r| r.condition == condition && r.policy == label)
                .collect()
        };
        let expert = pick(PolicyLabel::Expert);
        let br = pick(PolicyLabel::Br);
        if expert.is_empty() || br.is_empty() {
            continue;
        }
        let measures: [(&str, fn(&RunRecord) -> f64); 3] =
            [("regret", |r| r.regret), ("kl", |r| r.kl), ("reward_l2", |r| r.reward_l2)];
        for (name, f) in measures {
            let a: Vec<f64> = expert.iter().map(|r| f(r)).collect();
            let b: Vec<f64> = br.iter().map(|r| f(r)).collect();
            out.push(PairedSummary {
                condition: condition.to_string(),
                num_features,
                measure: name.to_string(),
                test: paired_test(&a, &b),
            });
        }
    }
    out
}

/// One episode from a bare config: world and prior come from `config.seed`,
/// and a cross-validated eta is chosen on the default training seeds.
pub fn run_episode(config: &GameConfig, theta_gt: &RewardParams, policy: PolicyLabel) -> Result<EvalResult> {
    config.validate()?;
    let world = GridWorld::new(config.clone())?;
    let prior = Belief::init(config, &mut rng_from_seed(derive_seed(config.seed, "belief", 0)));
    let demo_policy = match policy {
        PolicyLabel::Expert => DemoPolicy::Expert,
        PolicyLabel::Br => {
            let eta = match config.eta {
                Eta::Fixed(eta) => eta,
                Eta::CrossValidate => cross_validate_eta(
                    &world,
                    &DEFAULT_ETA_CANDIDATES,
                    &cv_seeds(config.seed, config.num_features, DEFAULT_CV_SAMPLES),
                    config.lambda,
                    config.belief_samples,
                    SearchWidth::default(),
                )?,
            };
            DemoPolicy::Instructive {
                eta,
                search: SearchWidth::default(),
            }
        }
    };
    let cache = LikelihoodCache::new(&world, &prior, config.lambda, world.learning_steps())?;
    Ok(episode::run_episode(&world, theta_gt, demo_policy, &prior, &cache)?.eval)
}

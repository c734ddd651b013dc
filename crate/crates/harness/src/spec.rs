//! What to run, and the on-disk experiment file that describes it.

use std::path::{Path, PathBuf};

use cirl_core::demonstrators::{DEFAULT_BEAM_WIDTH, DEFAULT_ETA_CANDIDATES};
use cirl_core::episode::PolicyLabel;
use cirl_core::{ConfigOverrides, GameConfig};
use serde::Deserialize;

use crate::error::{HarnessError, Result};

pub const DEFAULT_FEATURE_LEVELS: [usize; 2] = [3, 10];
pub const DEFAULT_NUM_SAMPLES: usize = 100;
pub const DEFAULT_CV_SAMPLES: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: GameConfig,
    pub policies: Vec<PolicyLabel>,
    pub feature_levels: Vec<usize>,
    /// Ground-truth samples per condition.
    pub num_samples: usize,
    pub lambda_sweep: Option<Vec<f64>>,
    /// Results CSV; the summary and heatmap dumps sit next to it.
    pub output_path: PathBuf,
    /// Training cases per eta cross-validation.
    pub cv_samples: usize,
    pub eta_candidates: Vec<f64>,
    pub beam_width: usize,
    /// Fill the `wall_ms` column. Off by default so results are byte-stable.
    pub record_wall_time: bool,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(base: GameConfig, output_path: impl Into<PathBuf>) -> Self {
        ExperimentSpec {
            base,
            policies: vec![PolicyLabel::Expert, PolicyLabel::Br],
            feature_levels: DEFAULT_FEATURE_LEVELS.to_vec(),
            num_samples: DEFAULT_NUM_SAMPLES,
            lambda_sweep: None,
            output_path: output_path.into(),
            cv_samples: DEFAULT_CV_SAMPLES,
            eta_candidates: DEFAULT_ETA_CANDIDATES.to_vec(),
            beam_width: DEFAULT_BEAM_WIDTH,
            record_wall_time: false,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.num_samples == 0 {
            return Err(HarnessError::Spec("num_samples must be at least 1".into()));
        }
        if self.feature_levels.is_empty() {
            return Err(HarnessError::Spec("feature_levels must not be empty".into()));
        }
        if self.policies.is_empty() {
            return Err(HarnessError::Spec("policies must not be empty".into()));
        }
        for &n in &self.feature_levels {
            self.base.with_num_features(n).validate()?;
        }
        if let Some(lambdas) = &self.lambda_sweep {
            if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
                return Err(HarnessError::Spec("sweep lambdas must be finite and nonnegative".into()));
            }
        }
        if self.eta_candidates.is_empty() || self.eta_candidates.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(HarnessError::Spec("eta candidates must be a non-empty list of nonnegative reals".into()));
        }
        if self.beam_width == 0 {
            return Err(HarnessError::Spec("beam_width must be at least 1".into()));
        }
        if self.cv_samples == 0 {
            return Err(HarnessError::Spec("cv_samples must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Spec("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn summary_path(&self) -> PathBuf {
        self.output_path.with_extension("summary.json")
    }

    pub fn heatmap_path(&self) -> PathBuf {
        self.output_path.with_extension("heatmaps.csv")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ExperimentFile = toml::from_str(text).map_err(|e| HarnessError::Spec(e.to_string()))?;
        let base = file.game.apply_to(&GameConfig::default())?;
        let e = file.experiment;
        let mut spec = ExperimentSpec::new(base, e.output.unwrap_or_else(|| PathBuf::from("results.csv")));
        if let Some(p) = e.policies {
            spec.policies = p;
        }
        if let Some(f) = e.feature_levels {
            spec.feature_levels = f;
        }
        if let Some(n) = e.num_samples {
            spec.num_samples = n;
        }
        spec.lambda_sweep = e.lambda_sweep;
        if let Some(n) = e.cv_samples {
            spec.cv_samples = n;
        }
        if let Some(c) = e.eta_candidates {
            spec.eta_candidates = c;
        }
        if let Some(w) = e.beam_width {
            spec.beam_width = w;
        }
        spec.record_wall_time = e.record_wall_time.unwrap_or(false);
        spec.threads = e.threads;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

/// `[game]` holds config overrides, `[experiment]` the run layout.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    #[serde(default)]
    game: ConfigOverrides,
    #[serde(default)]
    experiment: ExperimentSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    policies: Option<Vec<PolicyLabel>>,
    feature_levels: Option<Vec<usize>>,
    num_samples: Option<usize>,
    lambda_sweep: Option<Vec<f64>>,
    output: Option<PathBuf>,
    cv_samples: Option<usize>,
    eta_candidates: Option<Vec<f64>>,
    beam_width: Option<usize>,
    record_wall_time: Option<bool>,
    threads: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let spec = ExperimentSpec::from_toml_str("").unwrap();
        assert_eq!(spec.base, GameConfig::default());
        assert_eq!(spec.feature_levels, vec![3, 10]);
        assert_eq!(spec.num_samples, 100);
        assert_eq!(spec.policies, vec![PolicyLabel::Expert, PolicyLabel::Br]);
        assert!(!spec.record_wall_time);
    }

    #[test]
    fn sections_are_read() {
        let spec = ExperimentSpec::from_toml_str(
            r#"
            [game]
            grid_size = 6
            lambda = 2.0
            [experiment]
            policies = ["br"]
            feature_levels = [2]
            num_samples = 7
            lambda_sweep = [0.1, 1, 5]
            output = "out/r.csv"
            "#,
        )
        .unwrap();
        assert_eq!(spec.base.grid_size, 6);
        assert_eq!(spec.base.rbf_bandwidth, 1.5);
        assert_eq!(spec.policies, vec![PolicyLabel::Br]);
        assert_eq!(spec.lambda_sweep, Some(vec![0.1, 1.0, 5.0]));
        assert_eq!(spec.summary_path(), PathBuf::from("out/r.summary.json"));
        assert_eq!(spec.heatmap_path(), PathBuf::from("out/r.heatmaps.csv"));
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(ExperimentSpec::from_toml_str("[experiment]\nsamples = 3").is_err());
        assert!(ExperimentSpec::from_toml_str("[experiment]\nnum_samples = 0").is_err());
        assert!(ExperimentSpec::from_toml_str("[experiment]\nfeature_levels = []").is_err());
        assert!(ExperimentSpec::from_toml_str("[experiment]\npolicies = [\"oracle\"]").is_err());
        assert!(ExperimentSpec::from_toml_str("[game]\ngrid_size = 2\n[experiment]\nfeature_levels = [5]").is_err());
    }
}

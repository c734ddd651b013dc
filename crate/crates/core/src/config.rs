//! Game configuration and its flat key-value file format.

use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Trade-off weight of the instructive demonstrator, either pinned or chosen
/// by cross-validation before evaluation starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eta {
    Fixed(f64),
    CrossValidate,
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eta::Fixed(v) => write!(f, "{v}"),
            Eta::CrossValidate => f.write_str("cross-validate"),
        }
    }
}

impl Serialize for Eta {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Eta::Fixed(v) => serializer.serialize_f64(*v),
            Eta::CrossValidate => serializer.serialize_str("cross-validate"),
        }
    }
}

impl<'de> Deserialize<'de> for Eta {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct EtaVisitor;

        impl Visitor<'_> for EtaVisitor {
            type Value = Eta;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative number or \"cross-validate\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Eta, E> {
                Ok(Eta::Fixed(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Eta, E> {
                Ok(Eta::Fixed(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Eta, E> {
                Ok(Eta::Fixed(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Eta, E> {
                match v {
                    "cross-validate" => Ok(Eta::CrossValidate),
                    other => other
                        .parse::<f64>()
                        .map(Eta::Fixed)
                        .map_err(|_| E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(EtaVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub grid_size: usize,
    pub horizon_total: usize,
    pub learning_steps: usize,
    pub num_features: usize,
    pub rbf_bandwidth: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub eta: Eta,
    pub belief_samples: usize,
    pub seed: u64,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            grid_size: 10,
            horizon_total: 20,
            learning_steps: 10,
            num_features: 3,
            rbf_bandwidth: 2.5,
            gamma: 1.0,
            lambda: 10.0,
            eta: Eta::CrossValidate,
            belief_samples: 4000,
            seed: 0,
        }
    }
}

/// Partial configuration: every key optional, unknown keys rejected.
///
/// Used both for config files and for service-side overrides. Missing
/// fields fall back to [`GameConfig::default`], except that an omitted
/// `rbf_bandwidth` follows `grid_size / 4` and an omitted `learning_steps`
/// follows `horizon_total / 2`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_total: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_features: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rbf_bandwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Eta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belief_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ConfigOverrides {
    pub fn apply_to(&self, base: &GameConfig) -> Result<GameConfig> {
        let grid_size = self.grid_size.unwrap_or(base.grid_size);
        let horizon_total = self.horizon_total.unwrap_or(base.horizon_total);
        let learning_steps = match (self.learning_steps, self.horizon_total) {
            (Some(l), _) => l,
            (None, Some(h)) => h / 2,
            (None, None) => base.learning_steps,
        };
        let rbf_bandwidth = match (self.rbf_bandwidth, self.grid_size) {
            (Some(b), _) => b,
            (None, Some(g)) => g as f64 / 4.0,
            (None, None) => base.rbf_bandwidth,
        };
        let config = GameConfig {
            grid_size,
            horizon_total,
            learning_steps,
            num_features: self.num_features.unwrap_or(base.num_features),
            rbf_bandwidth,
            gamma: self.gamma.unwrap_or(base.gamma),
            lambda: self.lambda.unwrap_or(base.lambda),
            eta: self.eta.unwrap_or(base.eta),
            belief_samples: self.belief_samples.unwrap_or(base.belief_samples),
            seed: self.seed.unwrap_or(base.seed),
        };
        config.validate()?;
        Ok(config)
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size == 0 {
            return Err(Error::config("grid_size", "must be positive"));
        }
        if self.horizon_total == 0 {
            return Err(Error::config("horizon_total", "must be positive"));
        }
        if self.learning_steps == 0 {
            return Err(Error::config("learning_steps", "must be positive"));
        }
        if self.learning_steps > self.horizon_total {
            return Err(Error::config(
                "learning_steps",
                format!(
                    "{} exceeds horizon_total {}",
                    self.learning_steps, self.horizon_total
                ),
            ));
        }
        if self.num_features == 0 {
            return Err(Error::config("num_features", "must be at least 1"));
        }
        if self.num_features > self.grid_size * self.grid_size {
            return Err(Error::config(
                "num_features",
                "cannot exceed the number of grid cells (centers are distinct cells)",
            ));
        }
        if !(self.rbf_bandwidth.is_finite() && self.rbf_bandwidth > 0.0) {
            return Err(Error::config("rbf_bandwidth", "must be a positive real"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::config("gamma", "must lie in [0, 1]"));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::config("lambda", "must be a positive real"));
        }
        if let Eta::Fixed(eta) = self.eta {
            if !(eta.is_finite() && eta >= 0.0) {
                return Err(Error::config("eta", "must be nonnegative or \"cross-validate\""));
            }
        }
        if self.belief_samples == 0 {
            return Err(Error::config("belief_samples", "must be positive"));
        }
        Ok(())
    }

    pub fn deployment_steps(&self) -> usize {
        self.horizon_total - self.learning_steps
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let overrides: ConfigOverrides =
            toml::from_str(text).map_err(|e| Error::ConfigSyntax(e.to_string()))?;
        overrides.apply_to(&GameConfig::default())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn with_num_features(&self, n: usize) -> Self {
        GameConfig {
            num_features: n,
            ..self.clone()
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        GameConfig {
            lambda,
            ..self.clone()
        }
    }
}

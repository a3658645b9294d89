//! Run configuration, read from TOML and overridden by command-line flags.
//!
//! ```toml
//! model = "sequence"
//! order = 5
//! seed = 1
//!
//! [prior]
//! family = "gaussian"
//! shape = 0.25
//! w = "0.1/o"
//!
//! [train]
//! iterations = 2000
//! burn_in = 750
//! thin = 5
//! sigma_sweeps = 10
//!
//! [predict]
//! parallel = true
//!
//! [paths]
//! train = "train.txt"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use crate::data::ModelKind;
use crate::error::{Error, Result};
use crate::mcmc::Schedule;
use crate::prior::{Family, ModeRule, PriorSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub family: Family,
    /// Defaults to 5 (Cauchy) or 10 (Gaussian).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    pub shape: f64,
    pub w: ModeRule,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            family: Family::Cauchy,
            sigma0: None,
            shape: 0.25,
            w: ModeRule::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub sigma_sweeps: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let s = Schedule::default();
        TrainConfig {
            iterations: s.iterations,
            burn_in: s.burn_in,
            thin: s.thin,
            sigma_sweeps: s.sigma_sweeps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictConfig {
    pub parallel: bool,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig { parallel: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    /// Taken from the data (sequence) or the feature count
    /// (classification) when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    pub seed: u64,
    pub prior: PriorConfig,
    pub train: TrainConfig,
    pub predict: PredictConfig,
    pub paths: PathsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelKind::Sequence,
            order: None,
            seed: 1,
            prior: PriorConfig::default(),
            train: TrainConfig::default(),
            predict: PredictConfig::default(),
            paths: PathsConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            iterations: self.train.iterations,
            burn_in: self.train.burn_in,
            thin: self.train.thin,
            sigma_sweeps: self.train.sigma_sweeps,
        }
    }

    pub fn prior_spec(&self, order: usize) -> Result<PriorSpec> {
        let family = self.prior.family;
        PriorSpec::new(
            family,
            self.prior.sigma0.unwrap_or(family.default_sigma0()),
            self.prior.shape,
            &self.prior.w,
            order,
        )
    }

    /// Checks everything that can be checked before touching data.
    pub fn validate(&self) -> Result<()> {
        self.schedule().validate()?;
        if self.train.sigma_sweeps == 0 {
            return Err(Error::Config("sigma_sweeps must be at least 1".into()));
        }
        if let Some(o) = self.order {
            self.prior_spec(o)?;
        }
        Ok(())
    }
}

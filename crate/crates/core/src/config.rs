//! Experiment configuration files and command-line overrides.
//!
//! Configurations are TOML documents deserialized into [`ExperimentConfig`]:
//!
//! ```toml
//! runs = 1000
//! horizon = 500
//! initial_budget = 0.5
//! master_seed = 2024
//!
//! [environment]
//! kind = "sampled"
//! arm_count = 8
//! mean_low = -0.01
//! mean_high = 0.01
//! sigma_shape = 1.0
//! sigma_rate = 10.0
//!
//! [[policies]]
//! kind = "ucb"
//! alpha = 10.0
//!
//! [[policies]]
//! kind = "ruin_averse"
//! alpha = 10.0
//! lambda = 100.0
//! paths = 100
//! ```
//!
//! A fixed environment is written as `kind = "fixed"` with
//! `arms = [{ mean = 0.1, std_dev = 0.0 }, ...]`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::ExperimentConfig;

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn to_toml(config: &ExperimentConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::config(format!("cannot serialize configuration: {e}")))
}

/// Values given on the command line. They take precedence over the file;
/// `smoke` is applied first so explicit flags still win over the preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub smoke: bool,
    pub runs: Option<usize>,
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub alpha: Option<f64>,
    pub budget: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) -> Result<()> {
        if self.smoke {
            config.apply_smoke();
        }
        if let Some(runs) = self.runs {
            config.runs = runs;
        }
        if let Some(horizon) = self.horizon {
            config.horizon = horizon;
        }
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(paths) = self.paths {
            config.set_paths(paths);
        }
        if let Some(alpha) = self.alpha {
            config.set_alpha(alpha);
        }
        if let Some(budget) = self.budget {
            config.initial_budget = budget;
        }
        config.validate()
    }
}

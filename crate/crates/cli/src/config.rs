//! Sweep configuration: a flat TOML file of grids and run counts.
//!
//! ```toml
//! n = [50, 100, 150, 200]
//! t = [1, 2, 5, 8, 10]
//! r = [0.6, 0.8]
//! g = [2, 5]
//! p = [4, 8, 12]
//! datasets_per_cell = 20
//! partitions_per_dataset = 20
//! master_seed = 1
//! output_directory = "results"
//! ```
//!
//! Every key is optional and falls back to the values above. The fit
//! settings `max_iterations`, `convergence_tolerance` and
//! `regularization_epsilon` may be given as well.

use std::path::PathBuf;

use crowdc_core::FitConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("grid `{0}` is empty")]
    EmptyGrid(&'static str),
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("correct rate {0} is not finite")]
    NonFiniteRate(f64),
    #[error("fit settings: {0}")]
    Fit(#[from] crowdc_core::btl::BtlError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub n: Vec<usize>,
    pub t: Vec<u32>,
    pub r: Vec<f64>,
    pub g: Vec<usize>,
    pub p: Vec<usize>,
    pub datasets_per_cell: usize,
    pub partitions_per_dataset: usize,
    pub master_seed: u64,
    pub output_directory: PathBuf,
    pub max_iterations: usize,
    pub convergence_tolerance: f64,
    pub regularization_epsilon: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let fit = FitConfig::default();
        Self {
            n: vec![50, 100, 150, 200],
            t: vec![1, 2, 5, 8, 10],
            r: vec![0.6, 0.8],
            g: vec![2, 5],
            p: vec![4, 8, 12],
            datasets_per_cell: 20,
            partitions_per_dataset: 20,
            master_seed: 1,
            output_directory: PathBuf::from("results"),
            max_iterations: fit.max_iterations,
            convergence_tolerance: fit.convergence_tolerance,
            regularization_epsilon: fit.regularization_epsilon,
        }
    }
}

impl SweepConfig {
    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            max_iterations: self.max_iterations,
            convergence_tolerance: self.convergence_tolerance,
            regularization_epsilon: self.regularization_epsilon,
        }
    }

    /// Checks the config as a whole; individual grid cells may still be
    /// infeasible and are skipped by the sweep.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, empty) in [
            ("n", self.n.is_empty()),
            ("t", self.t.is_empty()),
            ("r", self.r.is_empty()),
            ("g", self.g.is_empty()),
            ("p", self.p.is_empty()),
        ] {
            if empty {
                return Err(ConfigError::EmptyGrid(name));
            }
        }
        if self.datasets_per_cell == 0 {
            return Err(ConfigError::ZeroCount("datasets_per_cell"));
        }
        if self.partitions_per_dataset == 0 {
            return Err(ConfigError::ZeroCount("partitions_per_dataset"));
        }
        if let Some(&r) = self.r.iter().find(|r| !r.is_finite()) {
            return Err(ConfigError::NonFiniteRate(r));
        }
        self.fit_config().validate()?;
        Ok(())
    }
}

/// Parses and validates a config file's text.
pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let config: SweepConfig = toml::from_str(text)?;
    config.validate()?;
    Ok(config)
}

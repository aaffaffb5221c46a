//! Layered tool configuration.
//!
//! Effective settings resolve in three layers: built-in defaults, then
//! the JSON file named by the `EMDTEX_CONFIG` environment variable, then
//! explicit caller values (CLI flags). Every field is optional; only
//! what a layer sets overrides the layer below.

use std::path::Path;

use serde::Deserialize;

use crate::bemd::WindowRule;
use crate::error::{Error, Result};
use crate::losses::LossWeights;

/// Environment variable naming a JSON config file.
pub const CONFIG_ENV: &str = "EMDTEX_CONFIG";

/// Optional overrides for tool behavior. `None` means "use the layer
/// below".
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToolConfig {
    pub n_bimfs: Option<usize>,
    pub window_rule: Option<WindowRule>,
    pub smoothing: Option<bool>,
    pub alpha: Option<f64>,
    pub sd_threshold: Option<f64>,
    pub max_sift_iterations: Option<usize>,
    pub max_imfs: Option<usize>,
    pub sample: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub weights: Option<LossWeights>,
}

impl ToolConfig {
    /// Parses a config file; unknown keys and bad values are rejected.
    pub fn from_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let cfg: ToolConfig = serde_json::from_slice(&bytes)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads the file named by `EMDTEX_CONFIG`, or the empty overlay if
    /// the variable is unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            None => Ok(ToolConfig::default()),
            Some(path) => ToolConfig::from_file(Path::new(&path)),
        }
    }

    /// Checks every set field against its module's preconditions.
    pub fn validate(&self) -> Result<()> {
        if self.n_bimfs == Some(0) {
            return Err(Error::InvalidConfig("n_bimfs must be at least 1".into()));
        }
        if let Some(v) = self.alpha {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("alpha must be finite, got {v}")));
            }
        }
        if let Some(v) = self.sd_threshold {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "sd_threshold must be finite and > 0, got {v}"
                )));
            }
        }
        if self.max_sift_iterations == Some(0) {
            return Err(Error::InvalidConfig(
                "max_sift_iterations must be at least 1".into(),
            ));
        }
        if self.max_imfs == Some(0) {
            return Err(Error::InvalidConfig("max_imfs must be at least 1".into()));
        }
        if self.sample == Some(0) {
            return Err(Error::InvalidConfig("sample must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidConfig("jobs must be at least 1".into()));
        }
        if let Some(w) = &self.weights {
            w.validate()?;
        }
        Ok(())
    }

    /// Overlay: every field set in `over` wins over `self`.
    pub fn merged_with(&self, over: &ToolConfig) -> ToolConfig {
        ToolConfig {
            n_bimfs: over.n_bimfs.or(self.n_bimfs),
            window_rule: over.window_rule.or(self.window_rule),
            smoothing: over.smoothing.or(self.smoothing),
            alpha: over.alpha.or(self.alpha),
            sd_threshold: over.sd_threshold.or(self.sd_threshold),
            max_sift_iterations: over.max_sift_iterations.or(self.max_sift_iterations),
            max_imfs: over.max_imfs.or(self.max_imfs),
            sample: over.sample.or(self.sample),
            seed: over.seed.or(self.seed),
            jobs: over.jobs.or(self.jobs),
            weights: over.weights.or(self.weights),
        }
    }
}

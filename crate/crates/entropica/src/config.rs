//! Run-wide configuration with CLI > environment > config file > default
//! layering.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::density::GridConfig;
use crate::{Error, Result};

/// Output format for manifests and tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::InvalidConfig(format!(
                "unknown output format `{other}` (expected text, json or csv)"
            ))),
        }
    }
}

/// Configuration for a CLI run. Defaults keep Gaussian grid entropy accurate
/// to better than 1e-4 nats while bounding memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Number of grid points per density; must be a power of two ≥ 2^10.
    pub grid_points: usize,
    /// Truncation radius in standard deviations beyond the family mean; ≥ 4.
    pub truncation_sigmas: f64,
    /// Default inequality tolerance in nats.
    pub tolerance_nats: f64,
    /// Blahut–Arimoto termination gap in nats.
    pub ba_gap_threshold: f64,
    /// Seed for the randomized property suites.
    pub seed: u64,
    /// Output format for manifests.
    pub output_format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_points: 1 << 14,
            truncation_sigmas: 10.0,
            tolerance_nats: 1e-3,
            ba_gap_threshold: 1e-6,
            seed: 42,
            output_format: OutputFormat::Text,
        }
    }
}

impl RunConfig {
    /// Checks the configuration invariants.
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < (1 << 10) || !self.grid_points.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "grid_points must be a power of two >= 1024, got {}",
                self.grid_points
            )));
        }
        if !(self.truncation_sigmas >= 4.0) {
            return Err(Error::InvalidConfig(format!(
                "truncation_sigmas must be >= 4, got {}",
                self.truncation_sigmas
            )));
        }
        if !(self.tolerance_nats > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance_nats must be positive, got {}",
                self.tolerance_nats
            )));
        }
        if !(self.ba_gap_threshold > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "ba_gap_threshold must be positive, got {}",
                self.ba_gap_threshold
            )));
        }
        Ok(())
    }

    /// Grid construction parameters implied by this configuration.
    pub fn grid(&self) -> GridConfig {
        GridConfig {
            points: self.grid_points,
            truncation_sigmas: self.truncation_sigmas,
        }
    }

    /// Same grid parameters at twice the resolution, for refinement retries.
    pub fn refined(&self) -> RunConfig {
        RunConfig {
            grid_points: self.grid_points * 2,
            ..self.clone()
        }
    }

    /// Loads overrides from a TOML file. Unknown keys are rejected.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        let overlay: FileOverlay = toml::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        overlay.apply(self);
        Ok(())
    }

    /// Applies `ENTROPICA_*` environment variables.
    pub fn load_env(&mut self) -> Result<()> {
        fn parse<T: std::str::FromStr>(name: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| {
                Error::InvalidConfig(format!("cannot parse {name}={value}"))
            })
        }
        if let Ok(v) = std::env::var("ENTROPICA_GRID_POINTS") {
            self.grid_points = parse("ENTROPICA_GRID_POINTS", &v)?;
        }
        if let Ok(v) = std::env::var("ENTROPICA_TRUNCATION_SIGMAS") {
            self.truncation_sigmas = parse("ENTROPICA_TRUNCATION_SIGMAS", &v)?;
        }
        if let Ok(v) = std::env::var("ENTROPICA_TOL") {
            self.tolerance_nats = parse("ENTROPICA_TOL", &v)?;
        }
        if let Ok(v) = std::env::var("ENTROPICA_BA_GAP") {
            self.ba_gap_threshold = parse("ENTROPICA_BA_GAP", &v)?;
        }
        if let Ok(v) = std::env::var("ENTROPICA_SEED") {
            self.seed = parse("ENTROPICA_SEED", &v)?;
        }
        if let Ok(v) = std::env::var("ENTROPICA_FORMAT") {
            self.output_format = v.parse()?;
        }
        Ok(())
    }
}

/// Partial configuration as read from a TOML file; every field optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileOverlay {
    grid_points: Option<usize>,
    truncation_sigmas: Option<f64>,
    tolerance_nats: Option<f64>,
    ba_gap_threshold: Option<f64>,
    seed: Option<u64>,
    output_format: Option<OutputFormat>,
}

impl FileOverlay {
    fn apply(self, config: &mut RunConfig) {
        if let Some(v) = self.grid_points {
            config.grid_points = v;
        }
        if let Some(v) = self.truncation_sigmas {
            config.truncation_sigmas = v;
        }
        if let Some(v) = self.tolerance_nats {
            config.tolerance_nats = v;
        }
        if let Some(v) = self.ba_gap_threshold {
            config.ba_gap_threshold = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.output_format {
            config.output_format = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_non_power_of_two_grid() {
        let cfg = RunConfig {
            grid_points: 3000,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_small_truncation() {
        let cfg = RunConfig {
            truncation_sigmas: 2.0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn file_overlay_applies_partial_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "grid_points = 2048\nseed = 7\n").unwrap();
        let mut cfg = RunConfig::default();
        cfg.load_file(&path).unwrap();
        assert_eq!(cfg.grid_points, 2048);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.truncation_sigmas, 10.0);
    }
}

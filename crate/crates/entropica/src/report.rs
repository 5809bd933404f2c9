//! Verified-inequality reports and run manifests.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::capacity::{CapacityResult, RobustnessReport};
use crate::config::RunConfig;
use crate::density::DensityGrid;
use crate::inequality::StabilitySweepRow;
use crate::mac::{MacRatesReport, RatePair};
use crate::mimo::BoundComparison;

/// One verified inequality instance: lhs vs rhs with an explicit tolerance.
///
/// `satisfied` holds exactly when `slack >= -tolerance`, and `slack` is
/// `lhs - rhs` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub satisfied: bool,
    pub inputs_digest: String,
}

impl GapReport {
    pub const CSV_HEADER: &'static str = "name,lhs,rhs,slack,tolerance,satisfied,inputs_digest";

    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64, digest: String) -> Self {
        let slack = lhs - rhs;
        GapReport {
            name: name.into(),
            lhs,
            rhs,
            slack,
            tolerance,
            satisfied: slack >= -tolerance,
            inputs_digest: digest,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.name, self.lhs, self.rhs, self.slack, self.tolerance, self.satisfied, self.inputs_digest
        )
    }
}

/// Short hex digest over the numeric content of check inputs, so a report can
/// be matched back to the exact grids and scalars it was computed from.
#[derive(Default)]
pub struct InputDigest {
    hasher: Sha256,
}

impl InputDigest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn grid(mut self, grid: &DensityGrid) -> Self {
        self.hasher.update(grid.label().as_bytes());
        self.hasher.update(grid.origin().to_le_bytes());
        self.hasher.update(grid.step().to_le_bytes());
        for w in grid.weights() {
            self.hasher.update(w.to_le_bytes());
        }
        self
    }

    pub fn scalar(mut self, value: f64) -> Self {
        self.hasher.update(value.to_le_bytes());
        self
    }

    pub fn text(mut self, value: &str) -> Self {
        self.hasher.update(value.as_bytes());
        self
    }

    pub fn finish(self) -> String {
        let bytes = self.hasher.finalize();
        bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A plain named value carried in a manifest alongside gap reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueReport {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl ValueReport {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        ValueReport {
            name: name.into(),
            value,
            unit: None,
        }
    }

    pub fn nats(name: impl Into<String>, value: f64) -> Self {
        ValueReport {
            name: name.into(),
            value,
            unit: Some("nats".to_string()),
        }
    }
}

/// Any report a subcommand can emit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Gap(GapReport),
    Value(ValueReport),
    Note { name: String, text: String },
    Capacity(CapacityResult),
    Robustness(RobustnessReport),
    MacRates(MacRatesReport),
    RateCorners { corners: Vec<RatePair> },
    Mimo(BoundComparison),
    Sweep { rows: Vec<StabilitySweepRow> },
}

impl Report {
    /// All gap reports contained in this report, including nested ones.
    pub fn gap_reports(&self) -> Vec<&GapReport> {
        match self {
            Report::Gap(g) => vec![g],
            Report::Robustness(r) => r.bound_reports.iter().collect(),
            Report::MacRates(r) => r.bound_reports.iter().collect(),
            _ => Vec::new(),
        }
    }
}

/// Everything a run produced, serializable and lossless under JSON round-trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: RunConfig,
    pub reports: Vec<Report>,
    pub timestamp: String,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: RunConfig, reports: Vec<Report>) -> Self {
        RunManifest {
            command: command.into(),
            config,
            reports,
            timestamp: chrono::Utc::now().to_rfc3339(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// True when every contained gap report is satisfied.
    pub fn all_satisfied(&self) -> bool {
        self.reports
            .iter()
            .flat_map(|r| r.gap_reports())
            .all(|g| g.satisfied)
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_and_satisfied_are_consistent() {
        let g = GapReport::new("x", 1.0, 0.5, 1e-3, "d".into());
        assert_eq!(g.slack, 0.5);
        assert!(g.satisfied);
        let g = GapReport::new("x", 0.5, 1.0, 1e-3, "d".into());
        assert_eq!(g.slack, -0.5);
        assert!(!g.satisfied);
        // Slack within tolerance of zero still counts as satisfied.
        let g = GapReport::new("x", 1.0, 1.0 + 5e-4, 1e-3, "d".into());
        assert!(g.satisfied);
    }

    #[test]
    fn manifest_json_round_trips() {
        let manifest = RunManifest::new(
            "doubling --density uniform(0,1)",
            RunConfig::default(),
            vec![
                Report::Value(ValueReport::nats("entropy", 0.123456789012345)),
                Report::Gap(GapReport::new("epi_doubling", 1.359, 1.0, 1e-3, "ab12".into())),
            ],
        );
        let json = manifest.to_json().unwrap();
        let back: RunManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(manifest, back);
    }
}

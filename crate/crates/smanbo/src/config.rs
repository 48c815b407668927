//! TOML experiment files.
//!
//! ```toml
//! seed = 7
//! maps = 10
//! out = "results"
//!
//! [sweep]
//! lambda = [15.0, 45.0, 75.0]
//! radius = [5.0]
//! horizon = [1, 3]
//! planner = ["sma-nbo", "sma-nbo-mwtp"]
//!
//! [scenario]
//! duration = 60.0
//! ospa_c = 50.0
//! ```
//!
//! Every key is optional. Sweep lists left out fall back to the matching
//! scenario value (`planner` to `sma-nbo`); unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use smanbo_core::ScenarioConfig;

use crate::error::{ConfigError, Result};
use crate::sim::PlannerKind;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planner: Option<Vec<PlannerKind>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Master seed; map and trial seeds derive from it.
    pub seed: u64,
    /// Forests generated per (lambda, radius) cell.
    pub maps: usize,
    pub out: PathBuf,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    /// Measure planner wall-clock. Off writes zeros and makes every output
    /// byte-reproducible.
    pub record_timing: bool,
    pub sweep: Sweep,
    pub scenario: ScenarioConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            seed: 0,
            maps: 1,
            out: PathBuf::from("results"),
            workers: 0,
            record_timing: true,
            sweep: Sweep::default(),
            scenario: ScenarioConfig::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn lambdas(&self) -> Vec<f64> {
        self.sweep.lambda.clone().unwrap_or_else(|| vec![self.scenario.lambda])
    }

    pub fn radii(&self) -> Vec<f64> {
        self.sweep.radius.clone().unwrap_or_else(|| vec![self.scenario.tree_radius])
    }

    pub fn horizons(&self) -> Vec<usize> {
        self.sweep.horizon.clone().unwrap_or_else(|| vec![self.scenario.horizon])
    }

    pub fn planners(&self) -> Vec<PlannerKind> {
        self.sweep.planner.clone().unwrap_or_else(|| vec![PlannerKind::SmaNbo])
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, reason: &str| ConfigError::Invalid {
            key: key.to_string(),
            line: None,
            reason: reason.to_string(),
        };
        if self.maps == 0 {
            return Err(invalid("maps", "must be at least 1"));
        }
        let Sweep { lambda, radius, horizon, planner } = &self.sweep;
        for (key, empty) in [
            ("sweep.lambda", lambda.as_ref().is_some_and(Vec::is_empty)),
            ("sweep.radius", radius.as_ref().is_some_and(Vec::is_empty)),
            ("sweep.horizon", horizon.as_ref().is_some_and(Vec::is_empty)),
            ("sweep.planner", planner.as_ref().is_some_and(Vec::is_empty)),
        ] {
            if empty {
                return Err(invalid(key, "sweep lists must not be empty"));
            }
        }
        if self.lambdas().iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(invalid("sweep.lambda", "must be non-negative"));
        }
        if self.radii().iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(invalid("sweep.radius", "must be positive"));
        }
        if self.horizons().contains(&0) {
            return Err(invalid("sweep.horizon", "must be at least 1"));
        }
        self.scenario.validate().map_err(|e| match e {
            smanbo_core::Error::Invalid { field, reason } => ConfigError::Invalid {
                key: format!("scenario.{field}"),
                line: None,
                reason,
            },
            other => ConfigError::Invalid {
                key: "scenario".into(),
                line: None,
                reason: other.to_string(),
            },
        })
    }
}

/// Parses and validates an experiment file.
pub fn parse_config_str(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let spec: ExperimentSpec = toml::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    spec.validate().map_err(|e| match e {
        ConfigError::Invalid { key, reason, .. } => {
            let line = find_key(text, &key);
            ConfigError::Invalid { key, line, reason }
        }
        other => other,
    })?;
    Ok(spec)
}

pub fn parse_config(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::error::Error::io(path, e))?;
    Ok(parse_config_str(&text)?)
}

/// The effective configuration as TOML; parsing it back gives an equal spec.
pub fn render_config(spec: &ExperimentSpec) -> String {
    toml::to_string(spec).expect("experiment spec always serializes")
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the assignment to the last segment of a dotted `key`, if any.
fn find_key(text: &str, key: &str) -> Option<usize> {
    let leaf = key.rsplit('.').next()?;
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(leaf).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

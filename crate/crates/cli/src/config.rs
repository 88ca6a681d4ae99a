//! Run configuration. Every section has documented defaults; unknown keys are
//! rejected at every level.

use hjdirac::dynamics::Method;
use hjdirac::geometry::{ChartKind, ChartSpec, MetricKind, MetricSpec};
use hjdirac::stat_mech::Statistics;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    /// Check-name → tolerance overrides for `verify`.
    pub tolerances: BTreeMap<String, f64>,
    pub verify: VerifySection,
    pub simulate: SimulateSection,
    pub ensemble: EnsembleSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: DEFAULT_SEED,
            tolerances: BTreeMap::new(),
            verify: VerifySection::default(),
            simulate: SimulateSection::default(),
            ensemble: EnsembleSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// RK4 step for the projectile closed-form checks.
    pub step: f64,
    /// Maxwell–Boltzmann sample size.
    pub samples: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { step: 1e-3, samples: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Projectile,
    Free,
    Quadratic,
    Harmonic,
    Covariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub x: [f64; 4],
    pub p: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub model: ModelName,
    pub m0: f64,
    /// Projectile acceleration.
    pub g: f64,
    /// Projectile launch velocity components `dx/ds`, `dy/ds`.
    pub ux: f64,
    pub uy: f64,
    /// Harmonic frequency.
    pub omega: f64,
    pub s_end: f64,
    pub step: f64,
    pub method: Method,
    /// Defaults per model when absent.
    pub initial: Option<InitialState>,
    /// Covariant runs only.
    pub metric: MetricSpec,
    pub chart: ChartSpec,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            model: ModelName::Projectile,
            m0: 1.0,
            g: 1.0,
            ux: 1.0,
            uy: 2.0,
            omega: 1.0,
            s_end: 2.0,
            step: 1e-3,
            method: Method::Rk4,
            initial: None,
            metric: MetricSpec { name: "polar".into(), kind: MetricKind::Polar, parameters: serde_json::Value::Null },
            chart: ChartSpec { name: "polar".into(), kind: ChartKind::Polar, parameters: serde_json::Value::Null },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OccupancySection {
    pub statistics: Statistics,
    pub levels: Vec<f64>,
    pub particles: usize,
    #[serde(default = "one")]
    pub beta: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub n: usize,
    pub m0: f64,
    pub temperature: f64,
    pub kb: f64,
    pub bins: usize,
    pub occupancy: Option<OccupancySection>,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self { n: 100_000, m0: 1.0, temperature: 2.0, kb: 1.0, bins: 40, occupancy: None }
    }
}

pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let raw: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config is not valid JSON: {e}")))?;
    match raw.get("schema_version") {
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => {}
        Some(v) => return Err(CliError::Usage(format!("unsupported schema_version {v}; expected {SCHEMA_VERSION}"))),
        None => return Err(CliError::Usage("config is missing schema_version".into())),
    }
    serde_json::from_value(raw).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
}

/// Parse `NAME=VALUE`.
pub fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got '{s}'"))?;
    let v: f64 = value.trim().parse().map_err(|_| format!("tolerance '{value}' is not a number"))?;
    if name.trim().is_empty() || !v.is_finite() {
        return Err(format!("invalid tolerance override '{s}'"));
    }
    Ok((name.trim().to_string(), v))
}

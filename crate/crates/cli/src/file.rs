//! The versioned scenario file format.

use std::fs;
use std::path::Path;

use npce_core::coalitions::VictoryMatrix;
use npce_core::generators::ParliamentSpec;
use npce_core::markov::{ChallengeModel, SolverConfig};
use npce_core::model::{validate_scenario, Scenario};
use npce_core::strategy::{StrategyDim, StrategySpace, DEFAULT_ROBUST_THRESHOLD};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1.0";

fn default_robust_threshold() -> f64 {
    DEFAULT_ROBUST_THRESHOLD
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    /// Direct input of `P`, bypassing coalition construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub victory_matrix: Option<MatrixInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parliament: Option<ParliamentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default = "default_robust_threshold")]
    pub robust_threshold: f64,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixInput {
    pub probabilities: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub challenge_model: ChallengeModel,
}

impl MatrixInput {
    pub fn labels(&self) -> Vec<String> {
        match &self.labels {
            Some(l) => l.clone(),
            None => (1..=self.probabilities.len()).map(|i| i.to_string()).collect(),
        }
    }
}

fn default_iterations() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub strategist: String,
    pub dims: Vec<StrategyDim>,
    pub budget: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Absolute finite-difference steps, one per dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<f64>>,
}

impl StrategySpec {
    pub fn space(&self) -> StrategySpace {
        StrategySpace {
            strategist: self.strategist.clone(),
            dims: self.dims.clone(),
            budget: self.budget,
        }
    }
}

/// Evenly spaced values of one scenario parameter, endpoints included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// `epsilon_scale`, `actors[<index or id>].capability` or `actors[<index or id>].vote_weight`.
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|k| self.min + (self.max - self.min) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// Reads, deserializes and validates a scenario file.
pub fn parse_scenario_file(path: &Path) -> Result<ScenarioFile, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<ScenarioFile, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Invalid(vec![if path == "." { inner.to_string() } else { format!("{path}: {inner}") }])
    })?;
    let violations = file.violations();
    if !violations.is_empty() {
        return Err(CliError::Invalid(violations));
    }
    Ok(file)
}

impl ScenarioFile {
    /// Schema-level problems, each prefixed by its field path.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            out.push(format!(
                "schema_version: unsupported version `{}`, expected `{SCHEMA_VERSION}`",
                self.schema_version
            ));
        }
        if let Some(s) = &self.scenario {
            out.extend(
                validate_scenario(s)
                    .nested("scenario")
                    .violations
                    .into_iter()
                    .map(|v| format!("{}: {}", v.path, v.message)),
            );
        }
        if let Some(m) = &self.victory_matrix {
            if let Err(e) = VictoryMatrix::from_rows(m.probabilities.clone()) {
                out.push(format!("victory_matrix.probabilities: {e}"));
            }
            if m.labels.as_ref().is_some_and(|l| l.len() != m.probabilities.len()) {
                out.push("victory_matrix.labels: one label per row required".into());
            }
        }
        if let Some(p) = &self.parliament {
            if let Err(e) = p.check() {
                out.push(format!("parliament: {e}"));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.steps == 0 {
                out.push("sweep.steps: at least one step required".into());
            }
            if !(sweep.min.is_finite() && sweep.max.is_finite()) {
                out.push("sweep: range must be finite".into());
            }
        }
        if !(self.robust_threshold >= 0.0 && self.robust_threshold <= 0.5) {
            out.push(format!("robust_threshold: {} is outside [0, 0.5]", self.robust_threshold));
        }
        if !(self.solver.tolerance > 0.0) {
            out.push("solver.tolerance: must be positive".into());
        }
        out
    }
}

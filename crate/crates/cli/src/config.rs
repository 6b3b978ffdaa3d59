//! Per-command configuration files. Unknown fields are rejected and every
//! file is validated before any computation starts.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use znd_core::params::p0;
use znd_core::stability::SweepSpec;
use znd_core::timedomain::ExperimentSpec;
use znd_core::ParamsInput;

use crate::CliError;

fn default_params() -> ParamsInput {
    p0().to_input()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "default_params")]
    pub params: ParamsInput,
}

fn default_profile_length() -> f64 {
    30.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    #[serde(default = "default_params")]
    pub params: ParamsInput,
    #[serde(default = "default_profile_length")]
    pub length: f64,
}

/// Rectangle `re × im` sampled with `n_re × n_im` points.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub n_re: usize,
    pub n_im: usize,
}

impl GridSpec {
    pub fn oracle_default() -> Self {
        GridSpec {
            re: [0.0, 5.0],
            im: [-5.0, 5.0],
            n_re: 9,
            n_im: 9,
        }
    }
}

/// `count` points drawn uniformly from the half-disc `Re λ ≥ 0, |λ| ≤ radius`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub count: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaConfig {
    #[serde(default = "default_params")]
    pub params: ParamsInput,
    /// Explicit points as `[re, im]` pairs.
    #[serde(default)]
    pub lambdas: Vec<[f64; 2]>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub random: Option<RandomSpec>,
}

impl Default for LambdaConfig {
    fn default() -> Self {
        LambdaConfig {
            params: default_params(),
            lambdas: Vec::new(),
            grid: Some(GridSpec::oracle_default()),
            random: None,
        }
    }
}

fn default_oracle_length() -> f64 {
    40.0
}

fn default_oracle_threshold() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_params")]
    pub params: ParamsInput,
    #[serde(default = "GridSpec::oracle_default")]
    pub grid: GridSpec,
    #[serde(default = "default_oracle_length")]
    pub length: f64,
    /// Largest acceptable relative discrepancy.
    #[serde(default = "default_oracle_threshold")]
    pub threshold: f64,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_params")]
    pub params: ParamsInput,
    #[serde(default)]
    pub n0: Option<usize>,
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default)]
    pub indent_r: Option<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "default_true")]
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "SweepSpec::reference")]
    pub grid: SweepSpec,
    #[serde(default)]
    pub n0: Option<usize>,
}

fn default_experiment() -> ExperimentSpec {
    ExperimentSpec::reference(0.05)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_params")]
    pub params: ParamsInput,
    #[serde(default = "default_experiment")]
    pub experiment: ExperimentSpec,
    /// Also run the unperturbed control.
    #[serde(default = "default_true")]
    pub control: bool,
}

/// Reads `path` as `T`, or returns `fallback` when no file is given.
pub fn load<T: DeserializeOwned>(
    path: Option<&Path>,
    fallback: impl FnOnce() -> T,
) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(fallback());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("invalid configuration: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_wrapper() {
        let c: ParamsConfig =
            parse(r#"{"params": {"u_plus": 0.5, "u_star": 1.5, "q": 0.1, "k": 2, "u_i": 1.0}}"#)
                .unwrap();
        assert_eq!(c.params.validate().unwrap(), znd_core::params::p1());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(parse::<ParamsConfig>(
            r#"{"params": {"u_plus": 0, "u_star": 2, "q": 0.3, "k": 1, "u_i": 1.2, "x": 1}}"#
        )
        .is_err());
        assert!(parse::<VerifyConfig>(r#"{"n00": 3}"#).is_err());
        assert!(parse::<SweepConfig>(
            r#"{"grid": {"u_plus": [0], "u_star": [2], "q_fraction": [0.5], "k": [1], "extra": 0}}"#
        )
        .is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let c: OracleConfig = parse("{}").unwrap();
        assert_eq!(c.grid, GridSpec::oracle_default());
        assert_eq!(c.length, 40.0);
        let s: SimulateConfig = parse("{}").unwrap();
        assert_eq!(s.experiment.grid.cells, 2000);
    }

    #[test]
    fn malformed_json_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{ not json").unwrap();
        let err = load::<ParamsConfig>(Some(&path), || unreachable!()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}

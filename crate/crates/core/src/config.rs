//! Experiment configuration: which campaign to run, at which parameters,
//! with which tolerances, and where to put the report.
//!
//! Configurations load from TOML files and serialize back losslessly;
//! every field can also be overridden from the command line. Tolerances
//! are an open map so a config file can tighten or loosen any report row
//! by name without code changes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Master seed used when neither the config file nor the command line
/// provides one ("majdyn" in hex).
pub const DEFAULT_MASTER_SEED: u64 = 0x6d61_6a64_796e;

/// The validation campaigns the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    WinProb,
    Termination,
    DayOneJoint,
    DayTwoLaw,
    CellKolmogorov,
    ModelTransfer,
    EnumValidation,
    OracleConvergence,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::WinProb,
        Experiment::Termination,
        Experiment::DayOneJoint,
        Experiment::DayTwoLaw,
        Experiment::CellKolmogorov,
        Experiment::ModelTransfer,
        Experiment::EnumValidation,
        Experiment::OracleConvergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::WinProb => "win_prob",
            Experiment::Termination => "termination",
            Experiment::DayOneJoint => "day_one_joint",
            Experiment::DayTwoLaw => "day_two_law",
            Experiment::CellKolmogorov => "cell_kolmogorov",
            Experiment::ModelTransfer => "model_transfer",
            Experiment::EnumValidation => "enum_validation",
            Experiment::OracleConvergence => "oracle_convergence",
        }
    }

    /// Default Monte Carlo budget. The enumeration and oracle campaigns run
    /// fixed deterministic suites, so a single "trial" covers the whole
    /// sweep.
    pub fn default_trials(self) -> u64 {
        match self {
            Experiment::WinProb => 10_000,
            Experiment::Termination => 2_000,
            Experiment::DayOneJoint => 50_000,
            Experiment::DayTwoLaw => 20_000,
            Experiment::CellKolmogorov => 100,
            Experiment::ModelTransfer => 5_000,
            Experiment::EnumValidation | Experiment::OracleConvergence => 1,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                Error::Config(format!(
                    "unknown experiment {s:?}; expected one of {}",
                    known.join(", ")
                ))
            })
    }
}

/// Full description of one validation campaign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    pub params: ModelParams,
    /// Per-row tolerance overrides keyed by report row name; rows not
    /// listed use the harness defaults.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
}

/// TOML-facing shape: everything except the experiment is optional and
/// falls back to the experiment's defaults.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Experiment,
    trials: Option<u64>,
    master_seed: Option<u64>,
    output_path: Option<PathBuf>,
    params: ModelParams,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    /// A config with the experiment's default budget, the default master
    /// seed, no output path and no tolerance overrides.
    pub fn new(experiment: Experiment, params: ModelParams) -> Self {
        ExperimentConfig {
            experiment,
            trials: experiment.default_trials(),
            master_seed: DEFAULT_MASTER_SEED,
            output_path: None,
            params,
            tolerances: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        // Re-run the constructor checks: deserialization bypasses them.
        ModelParams::new(self.params.n, self.params.delta, self.params.p)
            .map_err(|e| Error::Config(e.to_string()))?;
        for (name, &tol) in &self.tolerances {
            if !(tol > 0.0) || !tol.is_finite() {
                return Err(Error::Config(format!(
                    "tolerance {name:?} must be a positive finite number, got {tol}"
                )));
            }
        }
        Ok(())
    }

    /// The tolerance for a report row: the override from the config if one
    /// was given, the harness default otherwise.
    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let config = ExperimentConfig {
            experiment: raw.experiment,
            trials: raw.trials.unwrap_or_else(|| raw.experiment.default_trials()),
            master_seed: raw.master_seed.unwrap_or(DEFAULT_MASTER_SEED),
            output_path: raw.output_path,
            params: raw.params,
            tolerances: raw.tolerances,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

impl<'de> Deserialize<'de> for ExperimentConfig {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = RawConfig::deserialize(deserializer)?;
        Ok(ExperimentConfig {
            experiment: raw.experiment,
            trials: raw.trials.unwrap_or_else(|| raw.experiment.default_trials()),
            master_seed: raw.master_seed.unwrap_or(DEFAULT_MASTER_SEED),
            output_path: raw.output_path,
            params: raw.params,
            tolerances: raw.tolerances,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(1000, 0, 0.5).unwrap()
    }

    #[test]
    fn toml_round_trip_preserves_everything() {
        let mut config = ExperimentConfig::new(Experiment::DayOneJoint, params());
        config.trials = 123;
        config.master_seed = 99;
        config.output_path = Some(PathBuf::from("out/report.json"));
        config.tolerances.insert("day_one_windowed_tv".into(), 0.07);
        let text = config.to_toml_string().unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn missing_fields_fall_back_to_experiment_defaults() {
        let text = r#"
            experiment = "win_prob"
            [params]
            n = 500
            delta = 1
            p = 0.5
        "#;
        let config = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(config.trials, 10_000);
        assert_eq!(config.master_seed, DEFAULT_MASTER_SEED);
        assert_eq!(config.output_path, None);
        assert!(config.tolerances.is_empty());
        assert_eq!(config.params.n, 500);
        assert_eq!(config.params.delta, 1);
    }

    #[test]
    fn every_experiment_name_round_trips() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
            assert!(e.default_trials() >= 1);
        }
        assert!("day_one".parse::<Experiment>().is_err());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = ExperimentConfig::new(Experiment::WinProb, params());
        config.trials = 0;
        assert!(config.validate().is_err());

        let mut config = ExperimentConfig::new(Experiment::WinProb, params());
        config.tolerances.insert("x".into(), 0.0);
        assert!(config.validate().is_err());
        config.tolerances.insert("x".into(), -0.1);
        assert!(config.validate().is_err());

        let bad_p = r#"
            experiment = "win_prob"
            [params]
            n = 100
            delta = 0
            p = 1.5
        "#;
        assert!(ExperimentConfig::from_toml_str(bad_p).is_err());

        let unknown_key = r#"
            experiment = "win_prob"
            trails = 10
            [params]
            n = 100
            delta = 0
            p = 0.5
        "#;
        assert!(ExperimentConfig::from_toml_str(unknown_key).is_err());

        let unknown_experiment = r#"
            experiment = "day_zero"
            [params]
            n = 100
            delta = 0
            p = 0.5
        "#;
        assert!(ExperimentConfig::from_toml_str(unknown_experiment).is_err());
    }

    #[test]
    fn tolerance_lookup_prefers_override() {
        let mut config = ExperimentConfig::new(Experiment::WinProb, params());
        assert_eq!(config.tolerance("red_win_frequency", 0.02), 0.02);
        config
            .tolerances
            .insert("red_win_frequency".into(), 0.005);
        assert_eq!(config.tolerance("red_win_frequency", 0.02), 0.005);
    }

    #[test]
    fn save_and_load_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        let config = ExperimentConfig::new(Experiment::ModelTransfer, params());
        config.save(&path).unwrap();
        let back = ExperimentConfig::load(&path).unwrap();
        assert_eq!(back, config);
    }
}

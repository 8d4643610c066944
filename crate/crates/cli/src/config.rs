//! Experiment config files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Entropy,
    Variance,
    Moments,
    Mixing,
    Clt,
    Recurrence,
    SmbPath,
    Blocks,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Entropy => "entropy",
            Command::Variance => "variance",
            Command::Moments => "moments",
            Command::Mixing => "mixing",
            Command::Clt => "clt",
            Command::Recurrence => "recurrence",
            Command::SmbPath => "smb-path",
            Command::Blocks => "blocks",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixingMethod {
    Closed,
    Bruteforce,
}

/// A single number or a list of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MixingMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_limit: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec_path: PathBuf,
    pub command: Command,
    #[serde(default)]
    pub parameters: Parameters,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a config; relative paths inside it resolve against the config
    /// file's directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let config = Self::from_json(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((config, base))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.parameters
            .seed
            .ok_or_else(|| CliError::Config("parameters.seed is required".into()))
    }

    pub fn budget(&self) -> u128 {
        self.parameters.budget.unwrap_or(DEFAULT_BUDGET) as u128
    }

    pub fn require<T: Copy>(&self, value: Option<T>, name: &str) -> Result<T, CliError> {
        value.ok_or_else(|| CliError::Config(format!("parameters.{name} is required for {}", self.command.name())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let c = ExperimentConfig::from_json(
            r#"{"spec_path": "s.json", "command": "smb-path", "parameters": {"seed": 1, "w": 2}, "output_dir": "out"}"#,
        )
        .unwrap();
        assert_eq!(c.command, Command::SmbPath);
        assert_eq!(c.parameters.w.as_ref().unwrap().to_vec(), vec![2.0]);
        assert_eq!(c.budget(), 1 << 24);
    }

    #[test]
    fn rejects_unknown_command_and_fields() {
        assert!(ExperimentConfig::from_json(r#"{"spec_path": "s", "command": "dance", "output_dir": "o"}"#).is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"spec_path": "s", "command": "clt", "parameters": {"sed": 1}, "output_dir": "o"}"#
        )
        .is_err());
    }

    #[test]
    fn missing_seed_is_config_error() {
        let c = ExperimentConfig::from_json(r#"{"spec_path": "s", "command": "entropy", "output_dir": "o"}"#).unwrap();
        assert!(matches!(c.seed(), Err(CliError::Config(_))));
    }
}

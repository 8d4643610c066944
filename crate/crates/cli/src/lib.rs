//! Command-line front end for the smb-core experiments.

pub mod commands;
pub mod compare;
pub mod config;
pub mod error;
pub mod report;

use std::path::{Path, PathBuf};

pub use error::CliError;
pub use report::ReportEnvelope;

/// Overrides given on the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

/// Loads a config, runs it and writes the CSV/JSON pair. Returns the envelope
/// and the directory the files went to.
pub fn run_config(path: &Path, overrides: &RunOverrides) -> Result<(ReportEnvelope, PathBuf), CliError> {
    let (mut config, base) = config::ExperimentConfig::load(path)?;
    if let Some(seed) = overrides.seed {
        config.parameters.seed = Some(seed);
    }
    let out_dir = match &overrides.output_dir {
        Some(d) => d.clone(),
        None if config.output_dir.is_absolute() => config.output_dir.clone(),
        None => base.join(&config.output_dir),
    };
    let envelope = commands::run(&config, &base)?;
    envelope.write(&out_dir)?;
    Ok((envelope, out_dir))
}

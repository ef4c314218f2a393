//! Command-line front end: scenario configs in, spectra and check reports
//! out.
//!
//! Exit codes: 0 all checks pass, 1 a check failed (reports are still
//! written), 2 invalid configuration, 3 numerical abort.

pub mod config;
pub mod output;
pub mod runner;

use std::path::Path;

use susy_core::systems::SystemKind;
use thiserror::Error;

pub use config::{CheckKind, ScenarioConfig};
pub use runner::{CheckRecord, RunReport, SpectrumRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numerical abort: {0}")]
    Numerical(#[from] susy_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

/// Named systems, one per line, followed by `custom`.
pub fn list_scenarios() -> String {
    SystemKind::ALL
        .iter()
        .map(|k| format!("{}: {}\n", k.name(), k.description()))
        .collect()
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text)
}

/// Loads, runs and writes one scenario; returns the report and exit code.
pub fn run_file(path: &Path) -> Result<(RunReport, i32), CliError> {
    let mut cfg = load_config(path)?;
    cfg.apply_env()?;
    let report = runner::run(&cfg)?;
    output::write_report(&cfg, &report)?;
    let code = if report.failed() > 0 { 1 } else { 0 };
    Ok((report, code))
}

//! Command-line experiment driver for the `delaysgd` library: spec parsing,
//! replicated runs and CSV/JSON output.

pub mod commands;
pub mod experiment;
pub mod spec;

use std::path::Path;

pub use spec::{parse_spec, to_text, ExperimentSpec, SpecError, SpecErrors};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid spec:\n{0}")]
    Spec(#[from] SpecErrors),
    #[error(transparent)]
    Core(#[from] delaysgd::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(parse_spec(&text)?)
}

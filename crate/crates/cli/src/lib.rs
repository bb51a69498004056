//! Scenario orchestration for the shmcam pipeline: declarative case files,
//! per-stage artifacts on disk, comparison tables and SVG plots.

pub mod config;
pub mod pipeline;
pub mod plot;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{stage} failed for case {case}: {message}")]
    Stage { stage: &'static str, case: String, message: String },
    #[error(transparent)]
    Plot(#[from] plot::PlotError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Plot(plot::PlotError::UnknownKind(_)) => 1,
            CliError::Stage { .. } | CliError::Plot(_) => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

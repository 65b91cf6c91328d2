//! Experiment runner library behind the `qndlab` binary: spec files,
//! validated experiment dispatch, and atomic report writing.

pub mod config;
pub mod experiment;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad spec, parameters, or input files (exit code 1).
    #[error("{0}")]
    Validation(String),
    /// Failures while running a validated experiment (exit code 2).
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

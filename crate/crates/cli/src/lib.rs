//! Config-driven experiments over `bykov_core`: hitting times, diagnostics,
//! averages, adjusted times and conjugacy reports as CSV/JSON files.

pub mod config;
pub mod experiment;
pub mod output;
pub mod verify;

use bykov_core::BykovError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Model(#[from] BykovError),

    #[error("the conjugacy experiment needs `params_g` in the config")]
    MissingTarget,

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Exit status for a finished run.
pub fn exit_code(result: &Result<bool, CliError>) -> i32 {
    match result {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(_) => 1,
    }
}

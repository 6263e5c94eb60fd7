use thiserror::Error;

use crate::flow::Chart;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BykovError {
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("point on chart {found:?}, expected {expected:?}")]
    WrongChart { expected: Chart, found: Chart },

    #[error("time {t} outside the current sojourn [0, {exit}]")]
    OutOfSojourn { t: f64, exit: f64 },

    #[error("insufficient data: need {needed}, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("sequence did not converge: {0}")]
    NonConvergent(String),

    #[error("invalid time sequence: {0}")]
    InvalidTimes(String),

    #[error("invariant tuples differ (max relative deviation {max_rel_dev:e})")]
    InvariantMismatch { max_rel_dev: f64 },
}

pub type Result<T> = std::result::Result<T, BykovError>;

use thiserror::Error;

use crate::model::JobId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),
    #[error("job {0} has a precedence cycle")]
    Cycle(JobId),
    #[error("job {0} is not a rooted tree")]
    NotRootedTree(JobId),
    #[error("beta must exceed 1/e, got {0}")]
    BetaTooSmall(String),
    #[error("cannot parse beta from {0:?}")]
    BadBeta(String),
    #[error("instance too large for exhaustive search: {0}")]
    OracleGuard(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {msg}")]
    Trace { line: usize, msg: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("schedule is infeasible: {}", .0.join("; "))]
    Infeasible(Vec<String>),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

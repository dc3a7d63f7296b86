use thiserror::Error;

use crate::element::ElementId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown element id {0}")]
    UnknownElement(ElementId),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed oracle: {0}")]
    MalformedOracle(String),
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error("{what} is limited to {limit}, got {got}")]
    SizeLimit {
        what: &'static str,
        limit: usize,
        got: usize,
    },
    #[error("argument {value} outside domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("construction infeasible: {check}")]
    ConstructionInfeasible { check: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("instance JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

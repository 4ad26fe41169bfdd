use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("observation does not match the played action: {0}")]
    Inconsistent(String),

    #[error("arm {0} has never been observed")]
    UninitializedArm(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sink is not reachable from source")]
    NoPath,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid answer: {0}")]
    InvalidAnswer(String),

    #[error("unsupported polytope geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("requested mass {requested} exceeds available mass {available}")]
    InvalidMass { requested: f64, available: f64 },

    #[error("tracking support is empty")]
    EmptySupport,

    #[error("argument {value} outside domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("best response needs two distinct answers")]
    InvalidPair,

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

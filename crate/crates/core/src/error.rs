use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("invalid instance: {0}")]
    Validation(String),
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ModelError {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        ModelError::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ModelError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GravityError {
    #[error("travel time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("realized time {t_prime} exceeds direct time {t_direct}")]
    SlowerThanDirect { t_prime: f64, t_direct: f64 },
    #[error("a hub path needs at least two hubs, got {0}")]
    TooFewHubs(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("commodity ({0}, {1}) is not part of the instance")]
    UnknownCommodity(usize, usize),
    #[error("path enumeration capped after {0} paths")]
    Capped(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid hub line: {0}")]
    InvalidLine(String),
    #[error("refusing to enumerate about {estimate} hub lines (cap {cap})")]
    TooManyLines { estimate: f64, cap: u64 },
    #[error("branch-and-bound node cap {0} exceeded")]
    NodeCap(u64),
    #[error("no hub line with {0} hubs exists on the candidate edge set")]
    NoFeasibleLine(usize),
}

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("the outgoing-arc inequalities require variant f2l_prime, not {0}")]
    InvalidCombination(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("unknown variable `{0}` in solution")]
    UnknownVariable(String),
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl MilpError {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        MilpError::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MilpError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("node {id} ({label}) has no coordinates")]
    MissingCoordinates { id: usize, label: String },
}

//! Error type shared by all pipeline stages.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MapError {
    /// Circuit source could not be parsed. Carries the 1-based source line.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Hardware config file is malformed or has unknown/missing keys.
    #[error("hardware config error: {0}")]
    Config(String),

    /// The lattice cannot hold the requested number of atoms.
    #[error("lattice too small: {0}")]
    Capacity(String),

    /// No SWAP path or move chain can make a gate executable.
    #[error("routing failure: {0}")]
    Routing(String),

    /// A state-changing operation violated a mapping invariant.
    #[error("invalid operation: {0}")]
    State(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl MapError {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        MapError::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, MapError>;

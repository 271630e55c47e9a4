//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

use crate::medium::Vec2;

/// A ray or lookup point left the sampled domain.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("point ({:.6e}, {:.6e}) m is outside the domain", .0.x, .0.y)]
pub struct DomainExit(pub Vec2);

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },
    #[error("truncated payload at byte {offset}: expected {expected} values, found {found}")]
    Truncated {
        offset: u64,
        expected: usize,
        found: usize,
    },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("singular evaluation: {0}")]
    Singular(String),
    #[error("q vanishes at the last sample, reversal is undefined")]
    DegenerateEndpoint,
    #[error("reverse transmission undefined at step {0} (exp of interface increment >= 2)")]
    ReverseTransmission(usize),
    #[error(transparent)]
    Domain(#[from] DomainExit),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Format { .. } | Error::Truncated { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument falls outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("densities live on different grids")]
    GridMismatch,

    #[error("normalization of a zero-mass density")]
    ZeroMass,

    #[error("lost mass {lost:e} past u_max exceeds cap {cap:e}; enlarge u_max")]
    LostMass { lost: f64, cap: f64 },

    #[error(
        "fixed point did not converge after {iters} iterations (last L1 change {last_change:e})"
    )]
    NonConvergence { iters: usize, last_change: f64 },

    #[error("step instability at tau = {tau}: value {value:e} below clipping floor")]
    Instability { tau: f64, value: f64 },

    #[error("mass changed by {drift:e} in one step at tau = {tau}")]
    MassDrift { tau: f64, drift: f64 },

    #[error("time arguments must be ordered tau >= tau_1 >= ... >= tau_m")]
    UnorderedTimes,

    #[error("snapshot spacing {spacing} exceeds {limit} for the time quadrature")]
    SparseSnapshots { spacing: f64, limit: f64 },

    #[error("{count} particle(s) exceeded the u ceiling {ceiling}")]
    Overflow { count: u64, ceiling: f64 },

    #[error("no localized particles")]
    EmptyPopulation,

    #[error("acceptance norm {0:e} is below 1e-300; box far in the tail")]
    VanishingNorm(f64),

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("checkpoint decode: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

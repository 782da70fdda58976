use std::path::PathBuf;

use crate::ledger::Fidelity;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter combination that can never be valid.
    #[error("configuration error: {0}")]
    Config(String),

    /// A precondition of an operation was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{fidelity} objective returned non-finite value {value} at {point}")]
    NonFinite {
        fidelity: Fidelity,
        value: f64,
        point: String,
    },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("{path}: line {line}: {message}")]
    Data {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("run aborted for method {method} (seed {seed}): {source}")]
    RunAborted {
        method: String,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("nothing to plot")]
    NothingToPlot,

    #[error("plot rendering failed: {0}")]
    Plot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}

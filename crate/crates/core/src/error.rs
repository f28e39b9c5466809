use std::path::PathBuf;
use thiserror::Error;

/// Error type shared by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("assembly failed in cell {cell}: {detail}")]
    Assembly { cell: usize, detail: String },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("nonlinear solve did not converge after {iterations} iterations (residual history: {history:?})")]
    NonConvergence {
        iterations: usize,
        history: Vec<f64>,
        /// Last iterate, for post-mortem inspection.
        last_state: Vec<f64>,
    },

    #[error("interface width undefined: {0}")]
    UndefinedWidth(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

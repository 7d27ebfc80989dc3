use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular matrix while computing the {phase} concentration tensor")]
    Singular { phase: String },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("solver did not converge at step {step}: residual {residual:e} after {iterations} iterations")]
    NonConvergence {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("linear solver failure: {0}")]
    Linear(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Domain(_) => 2,
            Error::NonConvergence { .. }
            | Error::Linear(_)
            | Error::Singular { .. }
            | Error::Quadrature(_)
            | Error::Mesh(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}

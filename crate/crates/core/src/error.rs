use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad or inconsistent configuration; the CLI maps this to exit code 1.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("could not place {what} after {attempts} attempts (world too dense)")]
    Placement { what: &'static str, attempts: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid action {action} for agent {agent} (valid range 0..={max})")]
    InvalidAction {
        agent: usize,
        action: usize,
        max: usize,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("training diverged at iteration {iteration}: non-finite {quantity}")]
    Diverged {
        iteration: usize,
        quantity: &'static str,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input rather than by the run itself.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Placement { .. } | Error::Shape(_) | Error::Json(_)
        )
    }
}

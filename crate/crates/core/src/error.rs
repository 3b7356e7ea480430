use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("time step {dt:e} s exceeds the stability limit {limit:e} s")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("propagation failed at B = {field:.9} T: {source}")]
    AtField {
        field: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by the user's configuration rather than by a
    /// numerical or I/O failure during the run.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::InvalidParameter { .. })
    }
}

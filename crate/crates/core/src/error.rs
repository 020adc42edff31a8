use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Unsupported or malformed configuration (kernel token, Orlicz token, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Arguments violate an operation's preconditions.
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// Kernel sum in the operator denominator vanished.
    #[error("degenerate kernel sum {sum:e} at point {point:?}")]
    DegenerateKernel { sum: f64, point: Vec<f64> },

    #[error("every pixel is masked; nothing to inpaint from")]
    UnrecoverableMask,

    #[error("PGM parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

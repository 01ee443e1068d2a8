use crate::iesc::ConvergenceHistory;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Inward offset reaches the local radius of curvature.
    #[error("degenerate offset {offset} for curvature radius {radius}")]
    DegenerateOffset { offset: f64, radius: f64 },

    /// Kernel evaluated at zero separation.
    #[error("kernel singularity at separation {0}")]
    Singularity(f64),

    #[error("Mie truncation order {required} exceeds cap {cap}")]
    Capacity { required: usize, cap: usize },

    /// The convergence metric grew for several consecutive iterations.
    #[error("solver diverged after {} iterations", history.records.len())]
    Divergence { history: ConvergenceHistory },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

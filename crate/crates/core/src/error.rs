use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate density: total mass over the grid is {0}")]
    DegenerateDensity(f64),

    #[error("degenerate configuration: robots {0} and {1} coincide")]
    DegenerateConfiguration(usize, usize),

    #[error("numerical blowup at step {step}: robot {robot} has a non-finite state")]
    NumericalBlowup { step: usize, robot: usize },

    #[error("unsupported dimension {0}: operation requires d = 1")]
    UnsupportedDimension(usize),

    #[error("weight ascent failed: dual value decreased for {0} consecutive steps")]
    AscentFailure(usize),

    #[error("eigensolver residual {0:e} exceeds tolerance")]
    EigenResidual(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

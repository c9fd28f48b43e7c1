use thiserror::Error;

/// Errors raised by model construction, evolution and experiment setup.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix at frequency {omega} is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositiveSemidefinite { omega: f64, eigenvalue: f64 },

    #[error("invalid Gram matrix: residual norm squared {residual:e} at state {index}")]
    InvalidGram { index: usize, residual: f64 },

    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("state is not normalised (norm {0})")]
    NotNormalised(f64),

    #[error("time arguments must be non-increasing")]
    UnorderedTimes,

    #[error("time step {dt} too coarse: {constraint}")]
    StepTooCoarse { dt: f64, constraint: String },

    #[error("correlation does not decay below {threshold} within one period; use a larger grid or a different bath")]
    NoDecay { threshold: f64 },

    #[error("frequency {0} lies outside the grid")]
    OutsideGrid(f64),

    #[error("norm bound violated for coupling {index}: {encoded} > {original}")]
    NormBoundViolated {
        index: usize,
        encoded: f64,
        original: f64,
    },

    #[error("construction invariant broken: {0}")]
    Internal(String),

    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::NotPositiveSemidefinite { .. } => "not_psd",
            Error::InvalidGram { .. } => "invalid_gram",
            Error::NotHermitian(_) => "not_hermitian",
            Error::NotNormalised(_) => "not_normalised",
            Error::UnorderedTimes => "unordered_times",
            Error::StepTooCoarse { .. } => "step_too_coarse",
            Error::NoDecay { .. } => "no_decay",
            Error::OutsideGrid(_) => "outside_grid",
            Error::NormBoundViolated { .. } => "norm_bound",
            Error::Internal(_) => "internal",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

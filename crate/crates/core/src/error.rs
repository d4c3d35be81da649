use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("eigenvalue {value} at mode {mode} cannot be raised to power {exponent}")]
    NonPositiveEigenvalue { mode: usize, value: f64, exponent: f64 },

    #[error("inadmissible regularization schedule at step {step}: 1/alpha = {inv_alpha} > c*sigma = {bound}")]
    InadmissibleSchedule { step: usize, inv_alpha: f64, bound: f64 },

    #[error("operation requires data model {expected}")]
    WrongDataModel { expected: &'static str },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("numerical failure at step {step}: {detail}")]
    Numerical { step: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

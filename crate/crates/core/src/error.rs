use thiserror::Error;

use crate::fock::ModeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid basis: {0}")]
    Basis(String),

    #[error("mode {0} is not part of the basis")]
    UnknownMode(ModeId),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("bright/dark transform unavailable: {0}")]
    BdTransform(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("outside the unbroken regime: {0}")]
    Regime(String),

    #[error("numerical failure at z = {z:.6e} m: {reason}")]
    Numerical { z: f64, reason: String },

    #[error("undefined observable: {0}")]
    UndefinedObservable(String),

    #[error("invalid operator specification: {0}")]
    OperatorSpec(String),

    #[error("no phase matching: pump index {n_pump} must exceed fundamental index {n_fund}")]
    NoPhaseMatching { n_pump: f64, n_fund: f64 },

    #[error("degenerate fit: {0}")]
    FitDegenerate(String),

    #[error("invalid input data: {0}")]
    Data(String),

    #[error("at theta = {theta:.6} rad: {source}")]
    AtPhase {
        theta: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn numerical(z: f64, reason: impl Into<String>) -> Self {
        Error::Numerical { z, reason: reason.into() }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the integrators (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Numerical { .. } => true,
            Error::AtPhase { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

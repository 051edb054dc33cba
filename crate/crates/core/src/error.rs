use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state cannot be normalized (all coefficients vanish)")]
    NotNormalizable,

    #[error("dimension mismatch: expected {expected} parties, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("projection onto the requested point vanishes")]
    ZeroProjection,

    #[error("Möbius parameters define a constant map (ad - bc = 0)")]
    ConstantMap,

    #[error("prescription does not apply to Dicke states")]
    DickeState,

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("box is signaling (max marginal discrepancy {0:.3e})")]
    Signaling(f64),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

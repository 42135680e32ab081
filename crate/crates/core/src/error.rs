use thiserror::Error;

use crate::matops::HermitianMatrix;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed argument: wrong shape, out-of-range parameter, invariant violated.
    #[error("invalid input: {0}")]
    Input(String),

    /// An operation needed an inverse (or negative power) of a singular operator.
    #[error("singular operator: {0}")]
    Singular(String),

    /// A scalar function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The ε-regularization schedule ran out before successive iterates agreed.
    #[error(
        "ε-limit did not converge: relative change {residual:.3e} > tolerance {tolerance:.3e}"
    )]
    NonConvergence {
        residual: f64,
        tolerance: f64,
        previous: Box<HermitianMatrix>,
        last: Box<HermitianMatrix>,
    },

    /// A randomized generator could not produce a valid sample.
    #[error("generator failure: {0}")]
    Generator(String),

    /// A quantity that must be real or finite came out otherwise.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

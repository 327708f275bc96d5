use thiserror::Error;

use crate::certificate::CertificateError;
use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("H is not symmetric: |H[{row}][{col}] - H[{col}][{row}]| = {gap:e}")]
    AsymmetricH { row: usize, col: usize, gap: f64 },
    #[error("H is not positive semidefinite")]
    NotPsd,
    #[error("malformed problem: {0}")]
    Shape(String),
    #[error("rank-1 update breakdown at index {index}: 1 + Δ·M_ii = {denominator:e}")]
    SingularUpdate { index: usize, denominator: f64 },
    #[error("{what} is not positive definite")]
    NotSpd { what: &'static str },
    #[error("A^T A is rank deficient")]
    RankDeficient,
    #[error("labels must be -1 or +1 (found {value} at index {index})")]
    InvalidLabels { index: usize, value: f64 },
    #[error("invalid bounds at index {index}: l = {lower} must be < u = {upper}")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },
    #[error("active-set oracle is limited to n <= {limit} (got {n})")]
    Intractable { n: usize, limit: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
}

impl Error {
    /// True for errors caused by bad input rather than numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::SingularUpdate { .. } => false,
            Error::Linalg(LinalgError::NotPositiveDefinite { .. }) => false,
            Error::Linalg(LinalgError::NonFinite { .. }) => false,
            _ => true,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

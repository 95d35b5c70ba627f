use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside the domain accepted by an operation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Two objects that must live in the same excitation sector do not.
    #[error("sector mismatch: expected M = {expected}, got M = {found}")]
    SectorMismatch { expected: usize, found: usize },

    /// The sector dimension C(N, M) exceeds the materialization limit.
    #[error("sector C({n}, {m}) exceeds the limit of {limit} basis states")]
    SectorTooLarge { n: usize, m: usize, limit: usize },

    #[error("eigensolver failed for a {dimension}x{dimension} sector: {reason}")]
    Eigensolver { dimension: usize, reason: String },

    #[error("quadrature did not converge: estimate {estimate}, last change {change:e} after {panels} panels")]
    Quadrature {
        estimate: f64,
        change: f64,
        panels: usize,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

//! Error type shared by every module.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the exact and numeric kernels.
///
/// Work guards are errors, never silent truncation; a structural identity
/// that fails (a non-square where a square is forced, an inexact division
/// in an integral recurrence) is a `Domain` error because it certifies a
/// bug or an invalid input, not a numerical accident.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {context}: {detail}")]
    Domain { context: &'static str, detail: String },

    #[error("work limit exceeded in {context}: {detail}")]
    WorkLimit { context: &'static str, detail: String },

    #[error("no convergence in {context}: {detail}")]
    NoConvergence { context: &'static str, detail: String },

    #[error("point is not on the curve")]
    NotOnCurve,

    #[error("the identity point has no affine coordinates")]
    IdentityPoint,

    #[error("torsion point: {0}")]
    Torsion(String),

    #[error("singular reduction at {p}: {detail}")]
    SingularReduction { p: u64, detail: String },
}

impl Error {
    pub fn domain(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { context, detail: detail.into() }
    }

    pub fn work_limit(context: &'static str, detail: impl Into<String>) -> Self {
        Error::WorkLimit { context, detail: detail.into() }
    }

    pub fn no_convergence(context: &'static str, detail: impl Into<String>) -> Self {
        Error::NoConvergence { context, detail: detail.into() }
    }
}

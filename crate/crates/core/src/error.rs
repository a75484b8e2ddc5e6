//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular (relative pivot below tolerance)")]
    Singular,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("cap exceeded: {what} is {actual}, limit {limit}")]
    CapExceeded {
        what: &'static str,
        limit: usize,
        actual: usize,
    },
    #[error("polyhedron is infeasible")]
    Infeasible,
    #[error("vector is not in the normal cone at the given point")]
    NotNormal,
    #[error("unsupported set part for {0}")]
    Unsupported(&'static str),
    #[error("affine variational inequality has no solution")]
    NoSolution,
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("cross-check failed: {0}")]
    CrossCheck(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn cap(what: &'static str, limit: usize, actual: usize) -> Result<()> {
    if actual > limit {
        Err(Error::CapExceeded { what, limit, actual })
    } else {
        Ok(())
    }
}

use thiserror::Error;

/// Errors produced by assembly, kernels, preconditioners and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed sparse matrix: {0}")]
    MalformedMatrix(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("spaces are defined on different meshes")]
    MeshMismatch,

    #[error("conjugate gradient breakdown at iteration {iteration}: p'Ap = {curvature:.3e}")]
    Breakdown { iteration: usize, curvature: f64 },

    #[error("{solver} did not converge within {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("scalar inversion of Phi failed for s = {target}: bracket [{lo}, {hi}] after {iterations} iterations")]
    PhiInverse {
        target: f64,
        lo: f64,
        hi: f64,
        iterations: usize,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("line search failed: step fell below {min_step:e}")]
    LineSearch { min_step: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(op: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            op,
            expected,
            found,
        })
    }
}

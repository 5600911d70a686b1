//! Inner solvers for the Schur complement `S = Dᵀ I_σ⁻¹ D`: a geometric
//! multigrid V-cycle on Galerkin-coarsened operators, and preconditioned
//! conjugate gradients.

mod mg;
mod pcg;

pub use mg::{build_mg, mg_solve, MgConfig, MgHierarchy};
pub use pcg::pcg;

use crate::sparse::CsrMatrix;

/// A linear map `y = A x` on vectors of length [`LinearOperator::dim`].
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// Overwrites `y` with `A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y);
    }
}

/// `y = x`.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

/// Diagonal scaling by the inverse diagonal of a matrix.
#[derive(Debug, Clone)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Self {
        Self {
            inv_diag: a
                .diagonal()
                .iter()
                .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        }
    }
}

impl LinearOperator for Jacobi {
    fn dim(&self) -> usize {
        self.inv_diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.inv_diag) {
            *yi = xi * di;
        }
    }
}

/// Result of an inner solve.
#[derive(Debug, Clone)]
pub struct InnerSolve {
    pub x: Vec<f64>,
    /// V-cycles (multigrid) or CG steps consumed.
    pub iterations: usize,
    pub rel_residual: f64,
}

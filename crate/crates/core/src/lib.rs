//! Preconditioned primal-dual solvers for the 2D p-Laplacian on P1/P0
//! finite elements, with multigrid Schur-complement solves.

// `!(x > 0.0)` is the intended NaN-rejecting test, and index loops mirror
// the matrix formulas they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod dense;
pub mod error;
pub mod fem;
pub mod kernels;
pub mod mesh;
pub mod precon;
pub mod problems;
pub mod solvers;
pub mod sparse;

pub use error::{Error, Result};

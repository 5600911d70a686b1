use crate::dense::{axpy, dot, norm2};
use crate::error::{check_len, Error, Result};
use crate::precon::{InnerSolve, LinearOperator};

/// Preconditioned conjugate gradients from a zero initial guess.
///
/// Stops once `‖b − Ax‖/‖b‖ ≤ tol`. `max_iter` defaults to the dimension;
/// exceeding it, or a direction with `pᵀAp ≤ 0`, is an error.
pub fn pcg<A, M>(
    a: &A,
    b: &[f64],
    m_inv: &M,
    tol: f64,
    max_iter: Option<usize>,
) -> Result<InnerSolve>
where
    A: LinearOperator + ?Sized,
    M: LinearOperator + ?Sized,
{
    let n = a.dim();
    check_len("pcg (rhs)", n, b.len())?;
    check_len("pcg (preconditioner)", n, m_inv.dim())?;
    let cap = max_iter.unwrap_or(n).max(1);
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(InnerSolve {
            x,
            iterations: 0,
            rel_residual: 0.0,
        });
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    m_inv.apply(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    for it in 1..=cap {
        a.apply(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::Breakdown {
                iteration: it,
                curvature,
            });
        }
        let alpha = rz / curvature;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        rel = norm2(&r) / bnorm;
        if !rel.is_finite() {
            return Err(Error::NonFinite("conjugate gradient residual"));
        }
        if rel <= tol {
            return Ok(InnerSolve {
                x,
                iterations: it,
                rel_residual: rel,
            });
        }
        m_inv.apply(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::NotConverged {
        solver: "pcg",
        iterations: cap,
        residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precon::{Identity, Jacobi};
    use crate::sparse::CsrMatrix;

    #[test]
    fn identity_system_one_step() {
        let a = CsrMatrix::identity(4);
        let b = [1.0, -2.0, 3.0, 0.5];
        let out = pcg(&a, &b, &Identity(4), 1e-12, None).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x, b.to_vec());
    }

    #[test]
    fn exact_jacobi_one_step() {
        let d: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let a = CsrMatrix::from_diagonal(&d);
        let b = vec![1.0; 100];
        let out = pcg(&a, &b, &Jacobi::new(&a), 1e-12, None).unwrap();
        assert_eq!(out.iterations, 1);
        for (xi, di) in out.x.iter().zip(&d) {
            assert!((xi * di - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn small_spd_system() {
        let a = CsrMatrix::from_dense(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let out = pcg(&a, &[1.0, 2.0], &Jacobi::new(&a), 1e-12, None).unwrap();
        assert!((out.x[0] - 1.0 / 11.0).abs() < 1e-12);
        assert!((out.x[1] - 7.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn breakdown_on_indefinite() {
        let a = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        let r = pcg(&a, &[1.0, 1.0], &Identity(2), 1e-12, None);
        assert!(matches!(r, Err(Error::Breakdown { .. })));
    }

    #[test]
    fn cap_exceeded_is_an_error() {
        let a = CsrMatrix::from_dense(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let r = pcg(&a, &[1.0, 2.0, 3.0], &Identity(3), 1e-14, Some(1));
        assert!(matches!(r, Err(Error::NotConverged { .. })));
    }
}

use crate::dense::{all_finite, norm2, DenseCholesky};
use crate::error::{check_len, Error, Result};
use crate::precon::{InnerSolve, LinearOperator};
use crate::sparse::{galerkin_triple_with_restriction, CsrMatrix};

/// Stopping and smoothing parameters for [`mg_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgConfig {
    /// Relative residual target.
    pub tol: f64,
    /// Cap on V-cycles.
    pub max_cycles: usize,
    /// Symmetric Gauss–Seidel sweeps before and after the coarse correction.
    pub pre_smooth: usize,
    pub post_smooth: usize,
}

impl Default for MgConfig {
    fn default() -> Self {
        Self {
            tol: 1e-2,
            max_cycles: 5,
            pre_smooth: 2,
            post_smooth: 2,
        }
    }
}

impl MgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "multigrid tolerance must lie in (0, 1), got {}",
                self.tol
            )));
        }
        if self.max_cycles == 0 {
            return Err(Error::InvalidParameter(
                "multigrid needs at least one cycle".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Level {
    matrix: CsrMatrix,
    diag: Vec<f64>,
    /// From the next coarser level; `None` on the coarsest.
    prolongation: Option<CsrMatrix>,
    restriction: Option<CsrMatrix>,
}

/// Galerkin multigrid hierarchy; level 0 is the coarsest and is solved by a
/// dense Cholesky factorization.
#[derive(Debug, Clone)]
pub struct MgHierarchy {
    levels: Vec<Level>,
    coarse: DenseCholesky,
    pre_smooth: usize,
    post_smooth: usize,
}

/// Builds the hierarchy from the fine operator and interior prolongations
/// `transfers[l]: level l -> level l+1` (coarse to fine).
pub fn build_mg(s_fine: &CsrMatrix, transfers: &[CsrMatrix]) -> Result<MgHierarchy> {
    check_len("build_mg (square)", s_fine.nrows(), s_fine.ncols())?;
    if let Some(p) = transfers.last() {
        check_len("build_mg (finest prolongation)", s_fine.nrows(), p.nrows())?;
    }
    let asym = s_fine.relative_asymmetry();
    if asym > 1e-10 {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let mut levels: Vec<Level> = Vec::with_capacity(transfers.len() + 1);
    let mut current = s_fine.clone();
    for p in transfers.iter().rev() {
        let r = p.transpose();
        let coarse = galerkin_triple_with_restriction(p, &r, &current)?;
        levels.push(Level {
            diag: current.diagonal(),
            matrix: current,
            prolongation: Some(p.clone()),
            restriction: Some(r),
        });
        current = coarse;
    }
    let coarse = DenseCholesky::from_csr(&current)?;
    levels.push(Level {
        diag: current.diagonal(),
        matrix: current,
        prolongation: None,
        restriction: None,
    });
    levels.reverse();
    Ok(MgHierarchy {
        levels,
        coarse,
        pre_smooth: 2,
        post_smooth: 2,
    })
}

impl MgHierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn dim(&self) -> usize {
        self.levels.last().unwrap().matrix.nrows()
    }

    /// Operator on level `l` (0 = coarsest).
    pub fn operator(&self, l: usize) -> &CsrMatrix {
        &self.levels[l].matrix
    }

    pub fn fine_operator(&self) -> &CsrMatrix {
        &self.levels.last().unwrap().matrix
    }

    pub fn with_smoothing(mut self, pre: usize, post: usize) -> Self {
        self.pre_smooth = pre;
        self.post_smooth = post;
        self
    }

    /// Largest per-cycle reduction of the `S`-norm error over `cycles`
    /// V-cycles on `Sx = 0`, started from a seeded random error.
    pub fn contraction_factor(&self, cycles: usize, seed: u64) -> f64 {
        use rand::{Rng, SeedableRng};
        let n = self.dim();
        let a = self.fine_operator();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let zero = vec![0.0; n];
        let mut ax = vec![0.0; n];
        let energy = |x: &[f64], ax: &mut [f64]| {
            a.mul_vec_into(x, ax);
            crate::dense::dot(x, ax).max(0.0).sqrt()
        };
        let mut prev = energy(&x, &mut ax);
        let mut worst: f64 = 0.0;
        for _ in 0..cycles {
            if prev == 0.0 {
                break;
            }
            self.vcycle(&zero, &mut x);
            let e = energy(&x, &mut ax);
            worst = worst.max(e / prev);
            prev = e;
        }
        worst
    }

    /// One V-cycle applied to `x` in place for right side `b`.
    pub fn vcycle(&self, b: &[f64], x: &mut [f64]) {
        self.vcycle_level(
            self.levels.len() - 1,
            b,
            x,
            self.pre_smooth,
            self.post_smooth,
        );
    }

    fn vcycle_level(&self, l: usize, b: &[f64], x: &mut [f64], pre: usize, post: usize) {
        if l == 0 {
            x.copy_from_slice(b);
            self.coarse.solve_in_place(x);
            return;
        }
        let level = &self.levels[l];
        for _ in 0..pre {
            symmetric_gauss_seidel(&level.matrix, &level.diag, b, x);
        }
        let mut r = vec![0.0; b.len()];
        level.matrix.mul_vec_into(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let restriction = level.restriction.as_ref().unwrap();
        let mut rc = vec![0.0; restriction.nrows()];
        restriction.mul_vec_into(&r, &mut rc);
        let mut ec = vec![0.0; rc.len()];
        self.vcycle_level(l - 1, &rc, &mut ec, pre, post);
        let prolongation = level.prolongation.as_ref().unwrap();
        prolongation.mul_vec_into(&ec, &mut r);
        for (xi, ei) in x.iter_mut().zip(&r) {
            *xi += ei;
        }
        for _ in 0..post {
            symmetric_gauss_seidel(&level.matrix, &level.diag, b, x);
        }
    }
}

/// One V-cycle from a zero initial guess: a fixed SPD linear operator.
impl LinearOperator for MgHierarchy {
    fn dim(&self) -> usize {
        MgHierarchy::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.vcycle(x, y);
    }
}

/// Forward then backward Gauss–Seidel sweep.
fn symmetric_gauss_seidel(a: &CsrMatrix, diag: &[f64], b: &[f64], x: &mut [f64]) {
    let n = b.len();
    let relax = |i: usize, x: &mut [f64]| {
        if diag[i] == 0.0 {
            return;
        }
        let (cols, vals) = a.row(i);
        let mut s = b[i];
        for (&j, &v) in cols.iter().zip(vals) {
            if j != i {
                s -= v * x[j];
            }
        }
        x[i] = s / diag[i];
    };
    for i in 0..n {
        relax(i, x);
    }
    for i in (0..n).rev() {
        relax(i, x);
    }
}

/// V-cycles from a zero initial guess until `‖b − Sx‖/‖b‖ ≤ tol` or the
/// cycle cap is reached.
pub fn mg_solve(mg: &MgHierarchy, b: &[f64], cfg: &MgConfig) -> Result<InnerSolve> {
    cfg.validate()?;
    check_len("mg_solve", mg.dim(), b.len())?;
    let bnorm = norm2(b);
    if !bnorm.is_finite() {
        return Err(Error::NonFinite("multigrid right-hand side"));
    }
    let mut x = vec![0.0; b.len()];
    if bnorm == 0.0 {
        return Ok(InnerSolve {
            x,
            iterations: 0,
            rel_residual: 0.0,
        });
    }
    let level = mg.levels.len() - 1;
    let a = mg.fine_operator();
    let mut r = vec![0.0; b.len()];
    let mut rel = 1.0;
    let mut cycles = 0;
    while cycles < cfg.max_cycles {
        mg.vcycle_level(level, b, &mut x, cfg.pre_smooth, cfg.post_smooth);
        cycles += 1;
        a.mul_vec_into(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        rel = norm2(&r) / bnorm;
        if !rel.is_finite() || !all_finite(&x) {
            return Err(Error::NonFinite("multigrid iterate"));
        }
        if rel <= cfg.tol {
            break;
        }
    }
    Ok(InnerSolve {
        x,
        iterations: cycles,
        rel_residual: rel,
    })
}

use std::time::Instant;

use crate::dense::{dot, norm2, DenseCholesky};
use crate::error::{Error, Result};
use crate::fem::{assemble_schur, assemble_stiffness};
use crate::kernels::{primal_flux, BlockDiag2, PowerLaw};
use crate::precon::{build_mg, mg_solve, pcg, MgHierarchy};
use crate::problems::Problem;
use crate::sparse::CsrMatrix;

use super::{DualState, InnerSolver, SolveReport, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgdMode {
    /// Backtracking Armijo search on the discrete energy, starting from `α`.
    LineSearch,
    /// Constant step `α`.
    Fixed,
}

/// Operator `B` used to precondition the energy gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PgdPreconditioner {
    /// Unit-coefficient Laplacian, assembled once.
    Poisson,
    /// `Dᵀ diag((|∇u_k|_T + ε)^{p-2} / |T|) D`, the regularized weighted
    /// Laplacian at the current iterate, rebuilt every step.
    Weighted { eps: f64 },
}

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;

fn element_gradients(problem: &Problem, u: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; 2 * problem.num_elements()];
    problem.d().mul_vec_into(u, &mut g);
    for (chunk, &area) in g.chunks_exact_mut(2).zip(problem.areas()) {
        chunk[0] /= area;
        chunk[1] /= area;
    }
    g
}

/// Discrete energy `Σ_T |T|/p |∇u_h|_T|^p - fᵀu`.
pub fn pgd_energy(problem: &Problem, law: &PowerLaw, u: &[f64]) -> f64 {
    let g = element_gradients(problem, u);
    let p = law.p();
    let volume: f64 = g
        .chunks_exact(2)
        .zip(problem.areas())
        .map(|(c, &area)| area / p * c[0].hypot(c[1]).powf(p))
        .sum();
    volume - dot(problem.load(), u)
}

/// Energy gradient `Dᵀσ(u) - f` with `σ_T = |∇u_h|^{p-2}∇u_h` on each
/// element; also returns `σ(u)`.
pub fn pgd_gradient(problem: &Problem, law: &PowerLaw, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut sigma = element_gradients(problem, u);
    for chunk in sigma.chunks_exact_mut(2) {
        let s = primal_flux(&[chunk[0], chunk[1]], law);
        chunk.copy_from_slice(&s);
    }
    let mut grad = vec![0.0; problem.num_nodes()];
    problem.dt().mul_vec_into(&sigma, &mut grad);
    for (g, f) in grad.iter_mut().zip(problem.load()) {
        *g -= f;
    }
    (grad, sigma)
}

enum Poisson {
    Mg(MgHierarchy, crate::precon::MgConfig),
    Pcg(MgHierarchy, f64, usize),
    Direct(DenseCholesky),
}

impl Poisson {
    fn prepare(problem: &Problem, b: &CsrMatrix, inner: &InnerSolver) -> Result<Self> {
        Ok(match *inner {
            InnerSolver::Multigrid(mg) => Poisson::Mg(build_mg(b, problem.transfers())?, mg),
            InnerSolver::Pcg { tol, max_iter } => {
                Poisson::Pcg(build_mg(b, problem.transfers())?, tol, max_iter)
            }
            InnerSolver::Direct => Poisson::Direct(DenseCholesky::from_csr(b)?),
        })
    }

    fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, usize)> {
        match self {
            Poisson::Mg(mg, cfg) => mg_solve(mg, b, cfg).map(|s| (s.x, s.iterations)),
            Poisson::Pcg(mg, tol, max_iter) => {
                pcg(mg.fine_operator(), b, mg, *tol, Some(*max_iter)).map(|s| (s.x, s.iterations))
            }
            Poisson::Direct(c) => Ok((c.solve(b), 1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgdOptions {
    pub mode: PgdMode,
    pub preconditioner: PgdPreconditioner,
}

impl PgdOptions {
    pub fn new(mode: PgdMode, preconditioner: PgdPreconditioner) -> Self {
        Self {
            mode,
            preconditioner,
        }
    }
}

fn weighted_laplacian(problem: &Problem, law: &PowerLaw, u: &[f64], eps: f64) -> Result<CsrMatrix> {
    let g = element_gradients(problem, u);
    let blocks = g
        .chunks_exact(2)
        .zip(problem.areas())
        .map(|(c, &area)| {
            let w = (c[0].hypot(c[1]) + eps).powf(law.p() - 2.0) / area;
            [[w, 0.0], [0.0, w]]
        })
        .collect();
    assemble_schur(problem.p1(), &BlockDiag2::new(blocks))
}

/// Primal preconditioned gradient descent `u ← u - α B⁻¹∇I_h(u)`. Stops
/// when `‖∇I_h(u)‖/‖f‖` reaches the tolerance; this equals the dual
/// relative residual at `σ = σ(u)`.
pub fn pgd_solve(
    problem: &Problem,
    cfg: &SolverConfig,
    opts: &PgdOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let law = cfg.law_for(problem)?;
    if let PgdPreconditioner::Weighted { eps } = opts.preconditioner {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weighted PGD needs eps > 0, got {eps}"
            )));
        }
    }
    let mut fixed = match opts.preconditioner {
        PgdPreconditioner::Poisson => Some(Poisson::prepare(
            problem,
            &assemble_stiffness(problem.p1()),
            &cfg.inner,
        )?),
        PgdPreconditioner::Weighted { .. } => None,
    };
    let label = match opts.mode {
        PgdMode::LineSearch => "PGD (line search)",
        PgdMode::Fixed => "PGD (fixed step)",
    };
    let mut u = DualState::initial(problem, cfg.init).u;
    let mut report = SolveReport::new(label);
    let start = Instant::now();
    let mut energy = pgd_energy(problem, &law, &u);
    loop {
        let (grad, _) = pgd_gradient(problem, &law, &u);
        let rel = norm2(&grad) / problem.load_norm();
        report.history.push(rel);
        if rel <= cfg.stop_tol {
            report.converged = true;
            break;
        }
        if !rel.is_finite() || rel > cfg.divergence_limit || report.iterations >= cfg.max_outer {
            break;
        }
        let (d, work) = match (&mut fixed, opts.preconditioner) {
            (Some(b), _) => b.solve(&grad)?,
            (None, PgdPreconditioner::Weighted { eps }) => {
                let b = weighted_laplacian(problem, &law, &u, eps)?;
                Poisson::prepare(problem, &b, &cfg.inner)?.solve(&grad)?
            }
            (None, PgdPreconditioner::Poisson) => unreachable!(),
        };
        report.inner_total += work;
        match opts.mode {
            PgdMode::Fixed => {
                for (ui, di) in u.iter_mut().zip(&d) {
                    *ui -= cfg.alpha * di;
                }
            }
            PgdMode::LineSearch => {
                let slope = dot(&grad, &d);
                let mut t = cfg.alpha;
                let mut trial = vec![0.0; u.len()];
                loop {
                    if t < MIN_STEP {
                        return Err(Error::LineSearch { min_step: MIN_STEP });
                    }
                    for ((x, ui), di) in trial.iter_mut().zip(&u).zip(&d) {
                        *x = ui - t * di;
                    }
                    let e = pgd_energy(problem, &law, &trial);
                    if e <= energy - ARMIJO_C * t * slope {
                        energy = e;
                        break;
                    }
                    t *= 0.5;
                }
                u = trial;
            }
        }
        report.iterations += 1;
    }
    report.seconds = start.elapsed().as_secs_f64();
    Ok((u, report))
}

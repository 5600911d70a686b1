//! Outer iterations for the discrete saddle-point system
//!
//! ```text
//! [ M_T^{γ(σ)}  -D ] [σ]   [0]
//! [ Dᵀ           0 ] [u] = [f]
//! ```
//!
//! DualTPD in residual-correction form, its Newton limit, a preconditioned
//! Chambolle–Pock variant (DualPD) and primal preconditioned gradient
//! descent (PGD).

mod pd;
mod pgd;
mod tpd;

pub use pd::{dual_pd_solve, DualPdOptions};
pub use pgd::{pgd_energy, pgd_gradient, pgd_solve, PgdMode, PgdOptions, PgdPreconditioner};
pub use tpd::{dual_tpd_solve, newton_config, newton_solve, tpd_step};

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{all_finite, norm2, DenseCholesky};
use crate::error::{check_len, Error, Result};
use crate::fem::assemble_schur;
use crate::kernels::{
    dual_flux, gamma_regularized, jacobian_inverse_block_pow, BlockDiag2, MassRegularization,
    PowerLaw,
};
use crate::precon::{build_mg, mg_solve, pcg, InnerSolve, MgConfig};
use crate::problems::Problem;
use crate::sparse::CsrMatrix;

/// Iterate `(σ, u)`: `σ` has two entries per triangle, `u` one per
/// interior vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub sigma: Vec<f64>,
    pub u: Vec<f64>,
}

impl DualState {
    pub fn zeros(problem: &Problem) -> Self {
        Self {
            sigma: vec![0.0; 2 * problem.num_elements()],
            u: vec![0.0; problem.num_nodes()],
        }
    }

    /// Entries i.i.d. uniform on `[-1, 1]`, `σ` drawn before `u`.
    pub fn random(problem: &Problem, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| {
            (0..n)
                .map(|_| rng.gen_range(-1.0..=1.0))
                .collect::<Vec<f64>>()
        };
        let sigma = draw(2 * problem.num_elements());
        let u = draw(problem.num_nodes());
        Self { sigma, u }
    }

    pub fn initial(problem: &Problem, init: Init) -> Self {
        match init {
            Init::Zero => Self::zeros(problem),
            Init::Random(seed) => Self::random(problem, seed),
        }
    }

    fn check(&self, problem: &Problem) -> Result<()> {
        check_len("state sigma", 2 * problem.num_elements(), self.sigma.len())?;
        check_len("state u", problem.num_nodes(), self.u.len())?;
        if !all_finite(&self.sigma) || !all_finite(&self.u) {
            return Err(Error::NonFinite("initial state"));
        }
        Ok(())
    }
}

/// Choice of the `σ`-block preconditioner `I_σ⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    /// Inverse of the regularized nonlinear mass matrix.
    Mass,
    /// Inverse of the elementwise Jacobian of `σ ↦ M_T^{γ(σ)} σ`.
    Jacobian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Zero,
    Random(u64),
}

/// How the Schur complement correction is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerSolver {
    Multigrid(MgConfig),
    /// Conjugate gradients preconditioned by one V-cycle.
    Pcg {
        tol: f64,
        max_iter: usize,
    },
    /// Dense Cholesky; only for small meshes.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    pub preconditioner: Preconditioner,
    /// Regularization of the mass and Jacobian blocks; the exponent comes
    /// from the problem.
    pub lambda: f64,
    pub eps0: f64,
    pub mass_branch: MassRegularization,
    pub inner: InnerSolver,
    pub stop_tol: f64,
    pub max_outer: usize,
    pub init: Init,
    /// Runs with a relative residual above this are abandoned.
    pub divergence_limit: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            preconditioner: Preconditioner::Jacobian,
            lambda: PowerLaw::DEFAULT_LAMBDA,
            eps0: PowerLaw::DEFAULT_EPS0,
            mass_branch: MassRegularization::ShiftedNorm,
            inner: InnerSolver::Multigrid(MgConfig::default()),
            stop_tol: 1e-6,
            max_outer: 1000,
            init: Init::Zero,
            divergence_limit: 1e6,
        }
    }
}

impl SolverConfig {
    pub fn jacobian(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn mass(alpha: f64) -> Self {
        Self {
            alpha,
            preconditioner: Preconditioner::Mass,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step size must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.stop_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stopping tolerance must be positive, got {}",
                self.stop_tol
            )));
        }
        match self.inner {
            InnerSolver::Multigrid(mg) => mg.validate(),
            InnerSolver::Pcg { tol, max_iter } if !(tol > 0.0) || max_iter == 0 => Err(
                Error::InvalidParameter("PCG needs tol > 0 and max_iter > 0".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Power law of `problem` with this configuration's regularization.
    pub fn law_for(&self, problem: &Problem) -> Result<PowerLaw> {
        Ok(
            PowerLaw::with_regularization(problem.law().p(), self.lambda, self.eps0)?
                .with_mass_branch(self.mass_branch),
        )
    }

    pub fn label(&self) -> &'static str {
        match self.preconditioner {
            Preconditioner::Jacobian => "DualTPD-J",
            Preconditioner::Mass => "DualTPD-M",
        }
    }
}

/// Outcome of an outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solver: String,
    /// Outer steps taken.
    pub iterations: usize,
    /// Relative residual before each step and after the last one; the
    /// values tested against the stopping tolerance.
    pub history: Vec<f64>,
    /// V-cycles or CG steps summed over all outer steps.
    pub inner_total: usize,
    pub seconds: f64,
    pub converged: bool,
}

impl SolveReport {
    fn new(solver: &str) -> Self {
        Self {
            solver: solver.to_string(),
            iterations: 0,
            history: Vec::new(),
            inner_total: 0,
            seconds: 0.0,
            converged: false,
        }
    }

    /// Average inner work per outer step.
    pub fn avg_inner(&self) -> f64 {
        if self.iterations == 0 {
            0.0
        } else {
            self.inner_total as f64 / self.iterations as f64
        }
    }

    pub fn final_residual(&self) -> f64 {
        self.history.last().copied().unwrap_or(f64::NAN)
    }

    /// One `key=value` pair per line.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "solver={}", self.solver);
        let _ = writeln!(s, "iterations={}", self.iterations);
        let _ = writeln!(s, "avg_inner={:.3}", self.avg_inner());
        let _ = writeln!(s, "final_residual={:.6e}", self.final_residual());
        let _ = writeln!(s, "seconds={:.6}", self.seconds);
        let _ = writeln!(s, "converged={}", self.converged);
        let hist: Vec<String> = self.history.iter().map(|r| format!("{r:.6e}")).collect();
        let _ = writeln!(s, "history={}", hist.join(";"));
        s
    }

    pub const CSV_HEADER: &'static str =
        "solver,iterations,avg_inner,final_residual,seconds,converged";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{:.3},{:.6e},{:.6},{}",
            self.solver,
            self.iterations,
            self.avg_inner(),
            self.final_residual(),
            self.seconds,
            self.converged
        )
    }
}

/// Residuals `r^σ = M_T^{γ(σ)}σ - Du`, `r^u = Dᵀσ - f` and
/// `rel_r = ‖(r^σ, r^u)‖ / ‖f‖`.
pub fn residual(
    state: &DualState,
    problem: &Problem,
    law: &PowerLaw,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    check_len(
        "residual sigma",
        2 * problem.num_elements(),
        state.sigma.len(),
    )?;
    check_len("residual u", problem.num_nodes(), state.u.len())?;
    let mut r_sigma = vec![0.0; state.sigma.len()];
    problem.d().mul_vec_into(&state.u, &mut r_sigma);
    for (e, (&area, chunk)) in problem
        .areas()
        .iter()
        .zip(r_sigma.chunks_exact_mut(2))
        .enumerate()
    {
        let flux = dual_flux(&[state.sigma[2 * e], state.sigma[2 * e + 1]], law);
        chunk[0] = area * flux[0] - chunk[0];
        chunk[1] = area * flux[1] - chunk[1];
    }
    let mut r_u = vec![0.0; state.u.len()];
    problem.dt().mul_vec_into(&state.sigma, &mut r_u);
    for (r, f) in r_u.iter_mut().zip(problem.load()) {
        *r -= f;
    }
    let n = (norm2(&r_sigma).powi(2) + norm2(&r_u).powi(2)).sqrt();
    Ok((r_sigma, r_u, n / problem.load_norm()))
}

/// Block-diagonal `I_σ⁻¹` frozen at `sigma`.
pub fn sigma_preconditioner(
    sigma: &[f64],
    areas: &[f64],
    law: &PowerLaw,
    kind: Preconditioner,
) -> BlockDiag2 {
    let blocks = areas
        .iter()
        .zip(sigma.chunks_exact(2))
        .map(|(&area, s)| {
            let s = [s[0], s[1]];
            match kind {
                Preconditioner::Mass => {
                    let d = 1.0 / (gamma_regularized(&s, law) * area);
                    [[d, 0.0], [0.0, d]]
                }
                Preconditioner::Jacobian => jacobian_inverse_block_pow(&s, area, law),
            }
        })
        .collect();
    BlockDiag2::new(blocks)
}

/// Solves `S x = b` with the configured inner method.
pub(crate) fn schur_solve(
    problem: &Problem,
    s: &CsrMatrix,
    b: &[f64],
    inner: &InnerSolver,
) -> Result<InnerSolve> {
    match inner {
        InnerSolver::Multigrid(cfg) => {
            let mg = build_mg(s, problem.transfers())?;
            mg_solve(&mg, b, cfg)
        }
        InnerSolver::Pcg { tol, max_iter } => {
            let mg = build_mg(s, problem.transfers())?;
            pcg(s, b, &mg, *tol, Some(*max_iter))
        }
        InnerSolver::Direct => {
            let x = DenseCholesky::from_csr(s)?.solve(b);
            Ok(InnerSolve {
                x,
                iterations: 1,
                rel_residual: 0.0,
            })
        }
    }
}

/// `Dᵀ I_σ⁻¹ D` for the given blocks.
pub fn schur_matrix(problem: &Problem, blocks: &BlockDiag2) -> Result<CsrMatrix> {
    assemble_schur(problem.p1(), blocks)
}

use std::time::Instant;

use crate::error::Result;
use crate::kernels::PowerLaw;
use crate::precon::MgConfig;
use crate::problems::Problem;

use super::{
    residual, schur_matrix, schur_solve, sigma_preconditioner, DualState, InnerSolver,
    Preconditioner, SolveReport, SolverConfig,
};

/// One DualTPD step given the residuals at `state`. Returns the inner work.
fn step_from_residual(
    state: &mut DualState,
    problem: &Problem,
    law: &PowerLaw,
    cfg: &SolverConfig,
    r_sigma: &[f64],
    r_u: &[f64],
) -> Result<usize> {
    let blocks = sigma_preconditioner(&state.sigma, problem.areas(), law, cfg.preconditioner);
    let n_sigma = r_sigma.len();

    let mut z = vec![0.0; n_sigma];
    blocks.apply_into(r_sigma, &mut z);
    let mut rhs = vec![0.0; r_u.len()];
    problem.dt().mul_vec_into(&z, &mut rhs);
    for (b, r) in rhs.iter_mut().zip(r_u) {
        *b = r - *b;
    }
    let s = schur_matrix(problem, &blocks)?;
    let inner = schur_solve(problem, &s, &rhs, &cfg.inner)?;
    let du = inner.x;

    let mut w = vec![0.0; n_sigma];
    problem.d().mul_vec_into(&du, &mut w);
    for (wi, ri) in w.iter_mut().zip(r_sigma) {
        *wi += ri;
    }
    blocks.apply_into(&w, &mut z);

    let a = cfg.alpha;
    for (s, d) in state.sigma.iter_mut().zip(&z) {
        *s -= a * d;
    }
    for (u, d) in state.u.iter_mut().zip(&du) {
        *u -= a * d;
    }
    Ok(inner.iterations)
}

/// One step: residuals, transformed preconditioned correction, damped
/// update. Returns the inner work spent on the Schur solve.
pub fn tpd_step(state: &mut DualState, problem: &Problem, cfg: &SolverConfig) -> Result<usize> {
    cfg.validate()?;
    let law = cfg.law_for(problem)?;
    let (rs, ru, _) = residual(state, problem, &law)?;
    step_from_residual(state, problem, &law, cfg, &rs, &ru)
}

pub(crate) fn run_tpd(
    problem: &Problem,
    cfg: &SolverConfig,
    label: &str,
) -> Result<(DualState, SolveReport)> {
    cfg.validate()?;
    let law = cfg.law_for(problem)?;
    let mut state = DualState::initial(problem, cfg.init);
    state.check(problem)?;
    let mut report = SolveReport::new(label);
    let start = Instant::now();
    loop {
        let (rs, ru, rel) = residual(&state, problem, &law)?;
        report.history.push(rel);
        if rel <= cfg.stop_tol {
            report.converged = true;
            break;
        }
        if !rel.is_finite() || rel > cfg.divergence_limit || report.iterations >= cfg.max_outer {
            break;
        }
        report.inner_total += step_from_residual(&mut state, problem, &law, cfg, &rs, &ru)?;
        report.iterations += 1;
    }
    report.seconds = start.elapsed().as_secs_f64();
    Ok((state, report))
}

/// Iterates [`tpd_step`] until the relative residual reaches the stopping
/// tolerance or the step budget runs out.
pub fn dual_tpd_solve(problem: &Problem, cfg: &SolverConfig) -> Result<(DualState, SolveReport)> {
    run_tpd(problem, cfg, cfg.label())
}

/// `cfg` turned into Newton's method: Jacobian preconditioner, unit step and
/// a Schur solve tight enough to be exact.
pub fn newton_config(cfg: &SolverConfig) -> SolverConfig {
    SolverConfig {
        alpha: 1.0,
        preconditioner: Preconditioner::Jacobian,
        inner: InnerSolver::Multigrid(MgConfig {
            tol: 1e-10,
            max_cycles: 100,
            ..MgConfig::default()
        }),
        ..*cfg
    }
}

pub fn newton_solve(problem: &Problem, cfg: &SolverConfig) -> Result<(DualState, SolveReport)> {
    run_tpd(problem, &newton_config(cfg), "Newton")
}

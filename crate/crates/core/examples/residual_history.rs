//! Per-step relative residuals of DualTPD-J, DualTPD-M and the primal-dual
//! variant on one problem, printed as CSV columns for plotting.
//!
//! cargo run --release --example residual_history -- [p] > history.csv

use dualtpd::kernels::PowerLaw;
use dualtpd::problems::{Domain, ProblemSpec};
use dualtpd::solvers::{dual_pd_solve, dual_tpd_solve, DualPdOptions, SolverConfig};

fn main() -> dualtpd::Result<()> {
    let p: f64 = std::env::args()
        .nth(1)
        .map_or(1.5, |s| s.parse().expect("p"));
    let problem = ProblemSpec::with_mesh_size(Domain::Disk, PowerLaw::new(p)?, 64)?.assemble()?;
    let eps0 = if p < 2.0 { 1e-4 } else { 1e-16 };
    let (aj, am) = if p > 2.0 { (0.6, 1.3) } else { (1.0, 0.8) };
    let j = dual_tpd_solve(
        &problem,
        &SolverConfig {
            eps0,
            ..SolverConfig::jacobian(aj)
        },
    )?
    .1;
    let m = dual_tpd_solve(
        &problem,
        &SolverConfig {
            eps0,
            ..SolverConfig::mass(am)
        },
    )?
    .1;
    let pd = dual_pd_solve(
        &problem,
        &SolverConfig {
            eps0,
            ..SolverConfig::jacobian(0.5)
        },
        &DualPdOptions::default(),
    )?
    .1;

    let cols = [&j, &m, &pd];
    println!("step,{},{},{}", j.solver, m.solver, pd.solver);
    let rows = cols.iter().map(|r| r.history.len()).max().unwrap_or(0);
    for k in 0..rows {
        let cells: Vec<String> = cols
            .iter()
            .map(|r| {
                r.history
                    .get(k)
                    .map_or(String::new(), |v| format!("{v:.6e}"))
            })
            .collect();
        println!("{k},{}", cells.join(","));
    }
    Ok(())
}

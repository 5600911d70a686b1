//! Solve the radial p-Laplacian on the unit disk with DualTPD-J and compare
//! against the exact solution.
//!
//! cargo run --release --example quickstart -- [p] [1/h]

use dualtpd::kernels::PowerLaw;
use dualtpd::problems::{Domain, ProblemSpec};
use dualtpd::solvers::{dual_tpd_solve, SolverConfig};

fn main() -> dualtpd::Result<()> {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map_or(1.5, |s| s.parse().expect("p"));
    let inv_h: usize = args.next().map_or(64, |s| s.parse().expect("1/h"));

    let problem =
        ProblemSpec::with_mesh_size(Domain::Disk, PowerLaw::new(p)?, inv_h)?.assemble()?;
    println!(
        "disk, p = {p}, h = 1/{inv_h}: {} triangles, {} unknowns",
        problem.num_elements(),
        problem.num_dofs()
    );

    // small-flux regularization as used for p < 2
    let cfg = SolverConfig {
        eps0: if p < 2.0 { 1e-4 } else { 1e-16 },
        ..SolverConfig::jacobian(if p > 2.0 { 0.6 } else { 1.0 })
    };
    let (state, report) = dual_tpd_solve(&problem, &cfg)?;
    print!("{}", report.to_key_value());
    println!("u_l2_error={:.4e}", problem.u_error(&state.u)?);
    println!("sigma_l2_error={:.4e}", problem.sigma_error(&state.sigma)?);
    Ok(())
}

//! Discretization error of the manufactured square solution under mesh
//! refinement, with observed L2 rates for u (expected 2) and sigma
//! (expected 1).
//!
//! cargo run --release --example manufactured_convergence -- [p] [amplitude]

use dualtpd::bench::observed_rate;
use dualtpd::kernels::PowerLaw;
use dualtpd::problems::{Domain, ProblemSpec};
use dualtpd::solvers::{dual_tpd_solve, SolverConfig};

fn main() -> dualtpd::Result<()> {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map_or(4.0, |s| s.parse().expect("p"));
    let amplitude: f64 = args.next().map_or(1.0, |s| s.parse().expect("amplitude"));

    let cfg = SolverConfig {
        stop_tol: 1e-10,
        ..SolverConfig::jacobian(if p > 2.0 { 0.6 } else { 1.0 })
    };
    println!("square, p = {p}, u = {amplitude} x(x-1)y(y-1)");
    println!(
        "{:>7} {:>8} {:>12} {:>6} {:>12} {:>6} {:>5}",
        "h", "dofs", "|u-u_h|", "rate", "|s-s_h|", "rate", "its"
    );
    let mut prev: Option<(usize, f64, f64)> = None;
    for inv_h in [8, 16, 32, 64, 128] {
        let problem = ProblemSpec::with_mesh_size(Domain::Square, PowerLaw::new(p)?, inv_h)?
            .with_amplitude(amplitude)
            .assemble()?;
        let (state, report) = dual_tpd_solve(&problem, &cfg)?;
        let eu = problem.u_error(&state.u)?;
        let es = problem.sigma_error(&state.sigma)?;
        let (ru, rs) = match prev {
            Some((h0, u0, s0)) => (
                format!("{:.2}", observed_rate(u0, eu, h0, inv_h)),
                format!("{:.2}", observed_rate(s0, es, h0, inv_h)),
            ),
            None => (String::new(), String::new()),
        };
        println!(
            "{:>7} {:>8} {:>12.4e} {:>6} {:>12.4e} {:>6} {:>5}",
            format!("1/{inv_h}"),
            problem.num_dofs(),
            eu,
            ru,
            es,
            rs,
            report.iterations
        );
        prev = Some((inv_h, eu, es));
    }
    Ok(())
}

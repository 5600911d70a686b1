//! Robustness in the exponent: both preconditioners on the disk for p from
//! 1.05 to 10 with fixed step sizes.
//!
//! cargo run --release --example wide_p -- [1/h]

use dualtpd::kernels::PowerLaw;
use dualtpd::problems::{Domain, ProblemSpec};
use dualtpd::solvers::{dual_tpd_solve, SolverConfig};

fn main() -> dualtpd::Result<()> {
    let inv_h: usize = std::env::args()
        .nth(1)
        .map_or(64, |s| s.parse().expect("1/h"));
    // (p, alpha for J, alpha for M)
    let cases = [
        (1.05, 1.0, 1.0),
        (1.3, 1.0, 0.5),
        (1.5, 1.0, 0.8),
        (4.0, 0.6, 1.3),
        (10.0, 0.2, 1.5),
    ];
    println!("disk, h = 1/{inv_h}");
    println!("{:>6} {:>14} {:>14}", "p", "DualTPD-J", "DualTPD-M");
    for (p, aj, am) in cases {
        let problem =
            ProblemSpec::with_mesh_size(Domain::Disk, PowerLaw::new(p)?, inv_h)?.assemble()?;
        let eps0 = if p < 2.0 { 1e-4 } else { 1e-16 };
        let mut cells = vec![];
        for cfg in [SolverConfig::jacobian(aj), SolverConfig::mass(am)] {
            let (_, r) = dual_tpd_solve(&problem, &SolverConfig { eps0, ..cfg })?;
            let mark = if r.converged { "" } else { "!" };
            cells.push(format!("{}{mark} (a={})", r.iterations, cfg.alpha));
        }
        println!("{p:>6} {:>14} {:>14}", cells[0], cells[1]);
    }
    Ok(())
}

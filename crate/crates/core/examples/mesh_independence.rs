//! Outer iteration counts of DualTPD-J and DualTPD-M stay flat as the mesh
//! is refined. Prints iterations and average V-cycles per step.
//!
//! cargo run --release --example mesh_independence

use dualtpd::kernels::PowerLaw;
use dualtpd::problems::{Domain, ProblemSpec};
use dualtpd::solvers::{dual_tpd_solve, SolverConfig};

fn main() -> dualtpd::Result<()> {
    let runs = [
        (1.5, SolverConfig::jacobian(1.0)),
        (1.5, SolverConfig::mass(0.6)),
        (4.0, SolverConfig::jacobian(0.6)),
        (4.0, SolverConfig::mass(1.2)),
    ];
    let sizes = [32, 64, 128, 256];
    print!("{:<16}", "square");
    for n in sizes {
        print!("{:>12}", format!("1/{n}"));
    }
    println!();
    for (p, cfg) in runs {
        print!("{:<16}", format!("p={p} {} a={}", cfg.label(), cfg.alpha));
        for n in sizes {
            let problem = ProblemSpec::with_mesh_size(Domain::Square, PowerLaw::new(p)?, n)?
                .with_amplitude(1.0)
                .assemble()?;
            let (_, r) = dual_tpd_solve(&problem, &cfg)?;
            let cell = format!("{} ({:.1})", r.iterations, r.avg_inner());
            print!(
                "{:>12}",
                if r.converged {
                    cell
                } else {
                    format!("{cell}!")
                }
            );
        }
        println!();
    }
    Ok(())
}

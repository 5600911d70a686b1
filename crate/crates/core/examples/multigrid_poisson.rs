//! The Schur-complement multigrid on the unit-coefficient Laplacian:
//! V-cycle contraction, cycles to a 1e-2 residual and PCG iterations with a
//! V-cycle preconditioner, for both domains.
//!
//! cargo run --release --example multigrid_poisson

use dualtpd::fem::assemble_stiffness;
use dualtpd::kernels::PowerLaw;
use dualtpd::precon::{build_mg, mg_solve, pcg, MgConfig};
use dualtpd::problems::{Domain, ProblemSpec};

fn main() -> dualtpd::Result<()> {
    println!(
        "{:<8} {:>7} {:>8} {:>7} {:>12} {:>10}",
        "domain", "h", "unknowns", "levels", "contraction", "cycles/pcg"
    );
    for domain in [Domain::Square, Domain::Disk] {
        for inv_h in [16, 32, 64, 128, 256] {
            let problem =
                ProblemSpec::with_mesh_size(domain, PowerLaw::new(2.0)?, inv_h)?.assemble()?;
            let k = assemble_stiffness(problem.p1());
            let mg = build_mg(&k, problem.transfers())?;
            let rho = mg.contraction_factor(10, 1);
            let cycles = mg_solve(&mg, problem.load(), &MgConfig::default())?.iterations;
            let cg = pcg(&k, problem.load(), &mg, 1e-8, None)?.iterations;
            println!(
                "{:<8} {:>7} {:>8} {:>7} {:>12.3} {:>10}",
                domain.name(),
                format!("1/{inv_h}"),
                mg.dim(),
                mg.num_levels(),
                rho,
                format!("{cycles}/{cg}")
            );
        }
    }
    Ok(())
}

//! DualTPD against Newton, the primal-dual variant and preconditioned
//! gradient descent on the disk, from zero and random starting points.
//!
//! cargo run --release --example solver_comparison -- [p] [1/h] [seed]

use dualtpd::bench::{run_solver, SolverKind};
use dualtpd::kernels::PowerLaw;
use dualtpd::problems::{Domain, ProblemSpec};
use dualtpd::solvers::{Init, SolverConfig};

fn main() -> dualtpd::Result<()> {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map_or(1.5, |s| s.parse().expect("p"));
    let inv_h: usize = args.next().map_or(64, |s| s.parse().expect("1/h"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let problem =
        ProblemSpec::with_mesh_size(Domain::Disk, PowerLaw::new(p)?, inv_h)?.assemble()?;
    let eps0 = if p < 2.0 { 1e-4 } else { 1e-16 };
    let solvers = [
        (
            SolverKind::DualtpdJ,
            SolverConfig::jacobian(if p > 2.0 { 0.2 } else { 1.0 }),
        ),
        (
            SolverKind::DualtpdM,
            SolverConfig::mass(if p > 2.0 { 1.2 } else { 0.8 }),
        ),
        (SolverKind::Newton, SolverConfig::jacobian(1.0)),
        (SolverKind::Dualpd, SolverConfig::jacobian(0.5)),
        (SolverKind::PgdFixed, SolverConfig::jacobian(0.2)),
        (SolverKind::PgdLs, SolverConfig::jacobian(1.0)),
    ];
    println!("disk, p = {p}, h = 1/{inv_h}, random seed {seed}");
    println!(
        "{:<12} {:>6} {:>10} {:>10} {:>10} {:>10}",
        "solver", "alpha", "zero", "random", "inner/step", "u error"
    );
    for (kind, cfg) in solvers {
        let mut cells = vec![];
        let mut last = None;
        for init in [Init::Zero, Init::Random(seed)] {
            let cfg = SolverConfig { eps0, init, ..cfg };
            let (_, u, r) = run_solver(&problem, kind, &cfg, 0.8, 1e-4)?;
            cells.push(format!(
                "{}{}",
                r.iterations,
                if r.converged { "" } else { "!" }
            ));
            last = Some((r, u));
        }
        let (r, u) = last.unwrap();
        println!(
            "{:<12} {:>6} {:>10} {:>10} {:>10.2} {:>10.3e}",
            kind.name(),
            cfg.alpha,
            cells[0],
            cells[1],
            r.avg_inner(),
            problem.u_error(&u)?
        );
    }
    println!("inner work and error are from the random start; ! = stopped short of the tolerance");
    Ok(())
}

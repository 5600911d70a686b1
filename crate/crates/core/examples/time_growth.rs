//! Wall-clock time of DualTPD-J against the number of unknowns, written as
//! CSV and SVG through the bench runner.
//!
//! cargo run --release --example time_growth -- [out_dir]

use std::path::PathBuf;

use dualtpd::bench::{run_experiment, BenchConfig, Experiment};

fn main() -> dualtpd::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "time_growth_out".into()),
    );
    let cfg = BenchConfig::from_toml(
        "domain = \"square\"\np = [1.5]\ninv_h = [32, 64, 128, 256]\namplitude = 1.0\n",
    )?;
    let outcome = run_experiment(Experiment::TimeGrowth, &cfg, &out)?;
    for c in &outcome.cells {
        println!(
            "1/{:<4} {:>8} dofs {:>3} its {:>8.3}s",
            c.inv_h, c.dofs, c.report.iterations, c.report.seconds
        );
    }
    if let Some(s) = outcome.slope {
        println!("fitted slope of seconds vs dofs: {s:.2}");
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

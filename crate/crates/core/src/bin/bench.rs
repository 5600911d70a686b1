use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dualtpd::bench::{run_experiment, BenchConfig, Experiment};

/// Reproduce error, iteration and timing tables.
#[derive(Parser)]
#[command(name = "bench")]
struct Args {
    /// One of error-table, iteration-table, solver-compare, time-growth.
    experiment: Experiment,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV and SVG files.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = BenchConfig::load(&args.config)
        .and_then(|cfg| run_experiment(args.experiment, &cfg, &args.out));
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if let Some(s) = outcome.slope {
                println!("fitted slope {s:.3}");
            }
            let failed = outcome.cells.iter().filter(|c| !c.report.converged).count();
            if failed > 0 {
                eprintln!("{failed} of {} cells did not converge", outcome.cells.len());
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fosls::harness::{load_config, run_experiment, Experiment};

#[derive(Parser)]
#[command(name = "fosls", version, about = "Least-squares finite element experiments for the 2D Helmholtz equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `output_dir` from the config, then `results`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Lift the DOF, memory and probe-size limits.
    #[arg(long)]
    override_caps: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration.
    Solve(RunArgs),
    /// Fixed-k refinement study with observed orders.
    Convergence(RunArgs),
    /// Error versus k at a fixed mesh ratio.
    Pollution(RunArgs),
    /// Sample the solution along a horizontal line.
    Trace(RunArgs),
    /// Sample the solution on a grid.
    Surface(RunArgs),
    /// Smallest eigenvalue of the discrete stability pencil.
    Coercivity(RunArgs),
    /// Built-in checks, no config needed.
    Selftest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Solve(a) => (Experiment::Solve, a),
        Command::Convergence(a) => (Experiment::Convergence, a),
        Command::Pollution(a) => (Experiment::Pollution, a),
        Command::Trace(a) => (Experiment::Trace, a),
        Command::Surface(a) => (Experiment::Surface, a),
        Command::Coercivity(a) => (Experiment::Coercivity, a),
        Command::Selftest { out } => {
            let out = out.unwrap_or_else(|| PathBuf::from("results"));
            return finish(run_experiment(None, None, &out, false), &out);
        }
    };
    let cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = args.out.or_else(|| cfg.output_dir.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("results"));
    finish(run_experiment(Some(experiment), Some(&cfg), &out, args.override_caps), &out)
}

fn finish(result: fosls::Result<fosls::harness::RunSummary>, out: &std::path::Path) -> ExitCode {
    match result {
        Ok(s) => {
            println!("wrote {} to {}", s.outputs.join(", "), out.display());
            if s.skipped_rows > 0 {
                eprintln!("{} row(s) skipped by resource limits (see --override-caps)", s.skipped_rows);
            }
            if s.failed_rows > 0 {
                eprintln!("{} row(s) failed", s.failed_rows);
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tridyson_cli::commands::{collision_study, gbe, simulate, verify_identities, verify_sde};
use tridyson_cli::RunOptions;

#[derive(Debug, Parser)]
#[command(
    name = "tridyson",
    version,
    about = "Simulate and verify eigenvalue processes of tridiagonal Brownian/Bessel matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "tridyson-out")]
    out: PathBuf,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replaces the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write per-path eigenvalue trajectories as CSV.
    Simulate,
    /// Compare the eigenvalue SDE with direct diagonalization.
    VerifySde,
    /// Certify the determinant identities on random exact instances.
    VerifyIdentities {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        max_size: usize,
    },
    /// Collision and absorption frequencies across Bessel dimensions.
    CollisionStudy,
    /// Ensemble moments and the time-1 comparison.
    Gbe,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        config: cli.config,
        out: cli.out,
        threads: cli.threads,
        seed: cli.seed,
    };
    let result = match cli.command {
        Command::Simulate => simulate(&opts),
        Command::VerifySde => verify_sde(&opts),
        Command::VerifyIdentities { count, max_size } => verify_identities(&opts, count, max_size),
        Command::CollisionStudy => collision_study(&opts),
        Command::Gbe => gbe(&opts),
    };
    match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

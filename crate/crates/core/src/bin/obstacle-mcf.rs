//! Thin command-line front end; all logic lives in the library.

use clap::{Parser, Subcommand};
use obstacle_mcf::cli::{cmd_diagnose, cmd_profile_check, cmd_run, cmd_sweep, CliError};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "obstacle-mcf",
    about = "Obstacle-potential Allen-Cahn solver with mean curvature flow diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configured run and persist snapshots + diagnostics
    Run { config: PathBuf },
    /// Run the epsilon-refinement study (delta = eps^2, h = eps/4)
    Sweep {
        config: PathBuf,
        /// Comma-separated interface widths, e.g. 0.1,0.05,0.025
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
    },
    /// Recompute diagnostics offline from a persisted run directory
    Diagnose { dir: PathBuf },
    /// Self-test the profile and surface-tension identities
    ProfileCheck,
}

fn main() {
    let cli = Cli::parse();
    let result: Result<(), CliError> = match cli.command {
        Command::Run { config } => cmd_run(&config).map(|m| {
            println!(
                "run complete: {} files in {} ({:.1}s)",
                m.files.len(),
                m.output_dir,
                m.duration_seconds
            );
        }),
        Command::Sweep { config, epsilons } => cmd_sweep(&config, &epsilons).map(|(m, table)| {
            println!("sweep complete: {} runs", m.len());
            println!("epsilon,max_xi_mass");
            for (eps, mass) in table {
                println!("{eps},{mass:.6e}");
            }
        }),
        Command::Diagnose { dir } => cmd_diagnose(&dir).map(|r| {
            println!(
                "diagnose complete: {} snapshots verified, csv at {}",
                r.snapshots_checked, r.csv_path
            );
        }),
        Command::ProfileCheck => cmd_profile_check().map(|report| print!("{report}")),
    };
    if let Err(e) = result {
        eprintln!("{}", e.to_json());
        std::process::exit(1);
    }
}

//! Command-line front end over the batch harness.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chemolab::harness::{
    resolve_out_parent, run_convergence, run_exponent_table, run_regime_report, run_simulation,
    run_sweep, HarnessError, RunConfig, SweepSpec, EXIT_CONFIG,
};

#[derive(Parser)]
#[command(
    name = "chemolab",
    version,
    about = "Degenerate chemotaxis systems: simulation, parameter classification, sweeps"
)]
struct Cli {
    /// Suppress reports and progress chatter (artifacts are still written)
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its run directory
    Simulate {
        /// Configuration file
        #[arg(long)]
        config: PathBuf,
        /// Parent directory for run directories (CHEMOLAB_OUT overrides)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the parameters against the boundedness criteria
    CheckRegime {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run every point of a parameter sweep
    Sweep {
        /// Sweep file naming the base config and the axes
        #[arg(long)]
        config: PathBuf,
        /// Parent directory for the sweep directory (CHEMOLAB_OUT overrides)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to the sweep file, then the host)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Refinement study against the manufactured diffusion solution
    Convergence {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the interpolation exponent table over integer k
    VerifyExponents {
        #[arg(long)]
        config: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<i32, HarnessError> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let out_parent =
                resolve_out_parent(out.as_deref(), cfg.outputs.directory.as_deref());
            let sim = run_simulation(&cfg, &out_parent)?;
            if !cli.quiet {
                println!("run directory: {}", sim.run_dir.display());
                println!("classification: {}", sim.classification);
            }
            Ok(sim.exit_code)
        }
        Command::CheckRegime { config } => {
            let cfg = RunConfig::load(&config)?;
            let report = run_regime_report(&cfg, cli.quiet)?;
            Ok(report.exit_code)
        }
        Command::Sweep { config, out, jobs } => {
            let spec = SweepSpec::load(&config, jobs, cli.quiet)?;
            let out_parent = resolve_out_parent(out.as_deref(), None);
            run_sweep(&spec, &out_parent, cli.quiet)
        }
        Command::Convergence { config } => {
            let cfg = RunConfig::load(&config)?;
            run_convergence(&cfg, cli.quiet)
        }
        Command::VerifyExponents { config } => {
            let cfg = RunConfig::load(&config)?;
            run_exponent_table(&cfg, cli.quiet)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}

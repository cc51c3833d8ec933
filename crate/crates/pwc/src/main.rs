use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pwc::commands::{run_contradiction_demo, run_correlate, run_trajectories, run_verify, Outcome};
use pwc::{exit_status, Format, Pool, RunConfig};

/// Pilot-wave versus quantum two-time correlations of a harmonic oscillator.
#[derive(Debug, Parser)]
#[command(name = "pwc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; defaults apply to anything left out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "pwc-out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every numerical and physical self-check.
    Verify,
    /// Ground-state lag sweep showing opposite-sign correlations at T/2.
    DemoContradiction,
    /// Export Bohmian trajectories of the configured state.
    Trajectories,
    /// Correlation sweep for the configured state.
    Correlate,
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let resolved = config.resolve()?;
    let pool = Pool::from_env()?;
    match cli.command {
        Command::Verify => run_verify(&resolved, &cli.out, cli.format, &pool),
        Command::DemoContradiction => {
            run_contradiction_demo(&resolved, &cli.out, cli.format, &pool)
        }
        Command::Trajectories => run_trajectories(&resolved, &cli.out, cli.format, &pool),
        Command::Correlate => run_correlate(&resolved, &cli.out, cli.format, &pool),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli);
    match &result {
        Ok(outcome) => {
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Err(e) => eprintln!("error: {e:#}"),
    }
    ExitCode::from(exit_status(&result))
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use otto_cli::{emit_distribution, load_config, run_sweep, CliResult};

#[derive(Parser)]
#[command(name = "otto", version, about = "Monitored quantum Otto cycle sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the parameter sweep described by a config file.
    Run { config: PathBuf },
    /// Write the work distribution of one scheme.
    Dist { config: PathBuf },
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config } => run_sweep(&load_config(&config)?),
        Command::Dist { config } => emit_distribution(&load_config(&config)?),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("otto: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use chain_radiance::cli::{self, CliError, Command, Params, RunConfig};
use clap::Parser;

/// Eigenstates, radiation patterns and decay rates of a dipole-coupled qubit chain.
#[derive(Debug, Parser)]
#[command(name = "chain-radiance", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat JSON file with parameters keyed by long flag name.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match execute(args) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                let err = CliError::computation("analytic eigensystem failed the oracle checks");
                eprintln!("{}", err.to_json());
                ExitCode::from(err.exit_code() as u8)
            }
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn execute(args: Cli) -> Result<cli::RunOutcome, CliError> {
    let params = match &args.config {
        Some(path) => Params::from_file(path)?.overridden_by(args.params),
        None => args.params,
    };
    let config = RunConfig::from_params(args.command, params)?;
    cli::run(&config)
}

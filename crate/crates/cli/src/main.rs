use std::process::ExitCode;

use bellscan_cli::{run, Cli, CliError, RunConfig, SEED_ENV};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_seed = std::env::var(SEED_ENV).ok();
    let result = RunConfig::from_cli(cli, env_seed.as_deref()).and_then(|cfg| run(&cfg));
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> ExitCode {
    eprintln!("bellscan: {e}");
    ExitCode::from(e.exit_code())
}

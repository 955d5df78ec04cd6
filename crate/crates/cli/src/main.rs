use std::process::ExitCode;

use clap::Parser;
use dziobek_cli::args::Cli;

fn main() -> ExitCode {
    ExitCode::from(dziobek_cli::run(&Cli::parse()))
}

use std::process::ExitCode;

use clap::Parser;
use hbt_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match hbt_cli::execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use trustmarket::cli::{self, Cli};

fn main() -> ExitCode {
    match cli::execute(Cli::parse()) {
        Ok(stdout) => {
            println!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_stderr());
            ExitCode::from(err.exit_code())
        }
    }
}

mod commands;
mod config;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, Failure};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = std::panic::catch_unwind(|| commands::run(&cli));
    match result {
        Ok(Ok(done)) => {
            print!("{}", done.output);
            ExitCode::from(done.code)
        }
        Ok(Err(Failure::Input(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Internal(msg))) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("internal error: panic");
            ExitCode::from(2)
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use imverde::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("imverde: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use popsize::cli::{execute, exit_code, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    match execute(&cli, &args) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {:#}", anyhow::Error::from(e));
            ExitCode::from(code as u8)
        }
    }
}

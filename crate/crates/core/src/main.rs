use clap::Parser;

use ccp_netting::cli::{run_with, Cli, CliError};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run_with(&cli, &mut out) {
        Ok(()) | Err(CliError::Closed) => {}
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}

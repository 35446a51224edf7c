use std::error::Error as _;

use clap::Parser;

fn main() {
    let cli = vcmc_cli::Cli::parse();
    if let Err(e) = vcmc_cli::run(&cli) {
        eprintln!("error: {e}");
        let mut source = e.source();
        while let Some(s) = source {
            eprintln!("  caused by: {s}");
            source = s.source();
        }
        std::process::exit(e.exit_code());
    }
}

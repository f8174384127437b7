use std::process::ExitCode;

use clap::Parser;
use halfdisk_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match halfdisk_cli::run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

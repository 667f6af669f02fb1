use std::io::Write;
use std::process::ExitCode;

use bubblescope::cli::{self, Cli};
use clap::Parser;

fn main() -> ExitCode {
    // clap exits with 2 on usage errors and 0 for --help/--version.
    let cli = Cli::parse();
    match cli::run(&cli.command) {
        Ok(stdout) => {
            print!("{stdout}");
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", cli::error_json(&e, cli.command.name()));
            ExitCode::from(1)
        }
    }
}

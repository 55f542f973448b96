use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use vntree::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = io::BufWriter::new(stdout.lock());
    let mut err = stderr.lock();
    let result = run(cli, &mut out, &mut err);
    if let Err(e) = out.flush() {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use miso_capacity_cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let mut err = io::stderr();
    let code = match run(cli, &mut out, &mut err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit_code(&e)
        }
    };
    if out.flush().is_err() {
        return ExitCode::from(miso_capacity_cli::EXIT_USAGE);
    }
    ExitCode::from(code)
}

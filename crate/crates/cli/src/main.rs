use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use relaxwave_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let results = execute(&cli);
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    for r in &results {
        let _ = out.write_all(r.stdout.as_bytes());
        let _ = err.write_all(r.stderr.as_bytes());
    }
    ExitCode::from(results.iter().map(|r| r.exit_code).max().unwrap_or(0))
}

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use milnor_cli::{run, write_report, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = write_report(&report, cli.format, &mut out).and_then(|_| {
        out.flush()
            .map_err(|e| milnor_cli::CliError::Output(e.to_string()))
    }) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    if !report.passed {
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("check failed: {} = {:e} (threshold {:e})", c.name, c.value, c.threshold);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

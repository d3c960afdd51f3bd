use std::process::ExitCode;

use clap::Parser;
use locco_cli::{emit, run, summary_table, RunConfig, EXIT_ERROR, EXIT_FAILED};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let outcome = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if let Err(e) = emit(&config, &outcome) {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_ERROR);
    }
    if config.table {
        eprint!("{}", summary_table(&outcome.report));
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

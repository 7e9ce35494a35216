//! firey-lab: command-line front end of firey-core.
//!
//! Exit codes: 0 success, 1 precondition or verification failure (error
//! JSON on stderr and in error.json), 2 usage error.

mod args;
mod commands;
mod run;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;
use std::process::ExitCode;

use args::Cli;
use run::{Failure, Run};

const THREADS_ENV: &str = "FIREY_LAB_THREADS";

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot size the worker pool: {e}")))
}

fn report_failure(f: &Failure) -> ExitCode {
    match firey_core::io::to_json_string(&f.to_json()) {
        Ok(s) => eprint!("{s}"),
        Err(_) => eprintln!("{}", f.to_json()),
    }
    ExitCode::from(if f.usage { 2 } else { 1 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let _ = e.print();
                    report_failure(&Failure::usage(e.kind().to_string()))
                }
            };
        }
    };
    if let Err(f) = configure_threads().and_then(|_| commands::validate(&cli.common)) {
        return report_failure(&f);
    }
    let mut run = match Run::new(&cli.common) {
        Ok(r) => r,
        Err(f) => return report_failure(&f),
    };
    let outcome = commands::dispatch(&cli.command, &cli.common, &mut run);
    let (summary, failure) = match outcome {
        Ok(s) => (s, None),
        Err(f) => (f.details.clone().unwrap_or(Value::Null), Some(f)),
    };
    if let Err(f) = run.finish(&cli.common, &cli.command, &summary, failure.as_ref()) {
        return report_failure(&f);
    }
    match failure {
        Some(f) => report_failure(&f),
        None => {
            match firey_core::io::to_json_string(&summary) {
                Ok(s) => print!("{s}"),
                Err(e) => return report_failure(&e.into()),
            }
            ExitCode::SUCCESS
        }
    }
}

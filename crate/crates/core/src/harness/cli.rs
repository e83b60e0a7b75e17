//! Command-line front end: `emhd <kind> --config <path> [--seed S]
//! [--out DIR] [--threads K]`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! failure, 4 failed verification. Errors are reported on stderr as one
//! JSON object.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use super::run::run_experiment;
use crate::error::Error;

pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Simulate,
    Picard,
    Montecarlo,
    Verify,
    Inflate,
}

impl From<Kind> for ExperimentKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Simulate => ExperimentKind::Simulate,
            Kind::Picard => ExperimentKind::Picard,
            Kind::Montecarlo => ExperimentKind::Montecarlo,
            Kind::Verify => ExperimentKind::Verify,
            Kind::Inflate => ExperimentKind::Inflate,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "emhd", version, about = "Stochastic electron MHD experiments")]
struct Cli {
    #[arg(value_enum)]
    kind: Kind,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Snapshot(_) | Error::LatticeMismatch => EXIT_CONFIG,
        e if e.is_numerical() => EXIT_NUMERICAL,
        Error::MonotonicityViolation { .. } => EXIT_VERIFY,
        _ => EXIT_IO,
    }
}

fn error_kind(code: u8) -> &'static str {
    match code {
        EXIT_CONFIG => "config",
        EXIT_NUMERICAL => "numerical",
        EXIT_VERIFY => "verification",
        _ => "io",
    }
}

fn report(code: u8, message: String) -> ExitCode {
    let body = json!({ "error": error_kind(code), "exit_code": code, "message": message });
    eprintln!("{body}");
    ExitCode::from(code)
}

/// Parses `args` and runs the experiment.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(EXIT_CONFIG, e.to_string()),
    };
    if let Some(k) = cli.threads {
        if k == 0 {
            return report(EXIT_CONFIG, "--threads must be at least 1".into());
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            return report(EXIT_CONFIG, e.to_string());
        }
    }
    let mut cfg = match ExperimentConfig::load(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => return report(exit_code(&e), e.to_string()),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match run_experiment(&cfg, cli.kind.into(), &cli.out) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                report(EXIT_VERIFY, "verification failed; see reports.json".into())
            }
        }
        Err(e) => report(exit_code(&e), e.to_string()),
    }
}

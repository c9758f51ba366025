//! Command-line front end for the `qtransfer` core: strategy fidelities,
//! parameter sweeps, crossing points and the oracle validation suite.

pub mod args;
pub mod commands;
pub mod error;
pub mod format;
pub mod validate;

use std::io::Write;

pub use args::{Cli, Command, Format, RunConfig, StrategyKind};
pub use error::{CliError, EXIT_AMBIGUOUS, EXIT_INPUT, EXIT_IO, EXIT_OK, EXIT_VALIDATION};

/// Rendered report plus the exit status it implies.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub status: u8,
    /// Names of failed validation checks.
    pub failures: Vec<String>,
}

/// Runs a command without touching any output stream.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let config = &cli.config;
    match &cli.command {
        Command::Single { lambda0 } => commands::single(*lambda0, config),
        Command::Strategy {
            method,
            n,
            lambda0,
            mc_samples,
            distribution,
        } => commands::strategy(*method, *n, *lambda0, *mc_samples, *distribution, config),
        Command::Sweep { methods, n, grid } => commands::sweep(methods, n, *grid, config),
        Command::Crossings { n_max, tol } => commands::crossings(*n_max, *tol, config),
        Command::Validate { mc_samples } => commands::validate(*mc_samples, config),
    }
}

/// Runs a command and writes its report to `--output` or standard output.
pub fn execute(cli: &Cli) -> Result<u8, CliError> {
    let outcome = run(cli)?;
    match &cli.config.output {
        Some(path) => std::fs::write(path, &outcome.report).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(outcome.report.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    for name in &outcome.failures {
        eprintln!("check failed: {name}");
    }
    Ok(outcome.status)
}

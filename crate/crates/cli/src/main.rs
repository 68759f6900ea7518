//! `gevrey-tf`: batch front-end for the gevrey-tf library.
//!
//! Exit codes: 0 success, 1 internal error, 2 configuration error,
//! 3 numerical-quality error. Errors are reported on stderr as one JSON object
//! `{code, message, context}`; nothing is written on failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "gevrey-tf", version, about = "Extended Gevrey regularity through the short-time Fourier transform")]
struct Cli {
    /// JSON file with default option values; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Treat numerical-quality warnings as errors (exit code 3).
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the associated function T(k) and its Lambert-W bracket.
    Assoc(commands::AssocArgs),
    /// Sample an analysis window.
    Window(commands::WindowArgs),
    /// Short-time Fourier transform of a signal.
    Stft(commands::StftArgs),
    /// Fit the STFT decay class of a signal.
    Classify(commands::ClassifyArgs),
    /// Estimate wave front set and singular support.
    Wavefront(commands::WavefrontArgs),
    /// Run the built-in property suites.
    Verify(commands::VerifyArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::internal(e.to_string()))?;
    }
    let config = cli.config.as_deref().map(config::load).transpose()?;
    let ctx = commands::Context {
        config: config.as_ref(),
        strict: cli.strict,
    };
    let (name, outputs) = match &cli.command {
        Command::Assoc(a) => ("assoc", commands::assoc(a, &ctx)),
        Command::Window(a) => ("window", commands::window(a, &ctx)),
        Command::Stft(a) => ("stft", commands::stft(a, &ctx)),
        Command::Classify(a) => ("classify", commands::classify(a, &ctx)),
        Command::Wavefront(a) => ("wavefront", commands::wavefront(a, &ctx)),
        Command::Verify(a) => ("verify", commands::verify(a, &ctx)),
    };
    let outputs = outputs.map_err(|e| e.with_context("subcommand", name))?;
    outputs.commit().map_err(|e| e.with_context("subcommand", name))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::config(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.kind.exit_code() as u8);
        }
    };
    let result = std::panic::catch_unwind(|| run(cli))
        .unwrap_or_else(|_| Err(CliError::internal("unexpected panic")));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.kind.exit_code() as u8)
        }
    }
}

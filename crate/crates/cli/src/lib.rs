//! Library surface of the command-line driver, exposed so integration
//! tests can run commands in-process.

pub mod commands;
pub mod config;
pub mod manifest;

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] wfi_core::CoreError),
}

/// Parsed invocation: `wfi --config <path> --out <dir> [--seed N]
/// [--constants <path>] <subcommand>`.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: String,
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub constants: Option<PathBuf>,
}

/// Runs one subcommand; returns the process exit code (0 ok, 2 premise or
/// bound violations with outputs written, 1 error).
pub fn run(inv: &Invocation) -> Result<i32, CliError> {
    let policy = config::load_policy(inv.constants.as_deref())?;
    let ctx = commands::RunContext {
        config_path: &inv.config,
        out_dir: &inv.out,
        seed: inv.seed,
        policy,
    };
    match inv.command.as_str() {
        "measure" => commands::cmd_measure(&ctx),
        "capacity" => commands::cmd_capacity(&ctx),
        "beta" => commands::cmd_beta(&ctx),
        "convert" => commands::cmd_convert(&ctx),
        "verify" => commands::cmd_verify(&ctx),
        "simulate" => commands::cmd_simulate(&ctx),
        "bounds" => commands::cmd_bounds(&ctx),
        "report" => commands::cmd_report(&ctx),
        other => Err(CliError::Config(format!("unknown subcommand {other:?}"))),
    }
}

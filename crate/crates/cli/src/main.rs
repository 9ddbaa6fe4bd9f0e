use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use wfi_cli::{run, Invocation};

/// Weak functional inequality toolkit for 1D measures.
#[derive(Parser)]
#[command(name = "wfi", version, about)]
struct Cli {
    /// JSON configuration file for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for stochastic runs; fixed seed + fixed config means
    /// byte-identical outputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Optional constants-policy JSON overriding the defaults.
    #[arg(long, global = true)]
    constants: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a measure and export its normalizer, median and CDF.
    Measure,
    /// Capacity profile of half-lines and the necessary-condition check.
    Capacity,
    /// Capacity-derived rate, Hardy two-sided bounds and exponent fit.
    Beta,
    /// Convert a certificate between inequality families.
    Convert,
    /// Empirical verification on a test-function family.
    Verify,
    /// Fokker-Planck run with decay trace and bound overlays.
    Simulate,
    /// Export predicted bound curves.
    Bounds,
    /// Aggregate manifests under --out into a single report.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Measure => "measure",
            Command::Capacity => "capacity",
            Command::Beta => "beta",
            Command::Convert => "convert",
            Command::Verify => "verify",
            Command::Simulate => "simulate",
            Command::Bounds => "bounds",
            Command::Report => "report",
        }
    }

    fn needs_config(&self) -> bool {
        !matches!(self, Command::Report)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.out {
        Some(o) => o.clone(),
        None => {
            eprintln!("error: --out <dir> is required");
            return ExitCode::from(1);
        }
    };
    let config = match (&cli.config, cli.command.needs_config()) {
        (Some(c), _) => c.clone(),
        (None, false) => PathBuf::new(),
        (None, true) => {
            eprintln!("error: --config <path> is required for this subcommand");
            return ExitCode::from(1);
        }
    };
    let inv = Invocation {
        command: cli.command.name().to_string(),
        config,
        out,
        seed: cli.seed,
        constants: cli.constants.clone(),
    };
    match run(&inv) {
        Ok(code) => {
            if code == 2 {
                eprintln!("completed with reported violations (exit 2)");
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::SampleKind;
use crate::config::{ConfigArgs, RunConfig};
use crate::error::CliError;

/// Orbits of semisimple Lie algebras: invariant checks, sampling, deformation sweeps.
#[derive(Parser)]
#[command(name = "lieorbit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every invariant check and print a JSON report.
    Verify(ConfigArgs),
    /// Write orbit samples as CSV, one file per (kind, r).
    OrbitSample {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value = "adjoint")]
        kind: SampleKind,
    },
    /// Sample deformed orbits over the r list and summarize the distance to the limit orbit.
    DeformSweep(ConfigArgs),
    /// Write sections x + t i Y(x) of the gradient field of the height function of H.
    LagrangianSection {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated section parameters.
        #[arg(long, default_value = "0,0.5,1,2")]
        t: String,
    },
}

fn parse_ts(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::Usage(format!("invalid t value '{t}'")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Verify(args) => commands::verify(&RunConfig::resolve(&args)?),
        Command::OrbitSample { config, kind } => {
            commands::orbit_sample(&RunConfig::resolve(&config)?, kind)
        }
        Command::DeformSweep(args) => commands::deform_sweep(&RunConfig::resolve(&args)?),
        Command::LagrangianSection { config, t } => {
            commands::lagrangian_sections(&RunConfig::resolve(&config)?, &parse_ts(&t)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

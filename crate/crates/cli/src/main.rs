//! `lj-homographic`: construct, verify and sweep homographic solutions of
//! the generalized Lennard-Jones ring problems.
//!
//! Exit status: 0 pass, 1 verification failed, 2 invalid input, 3 search or
//! integration failure.

mod commands;
mod config;
mod exit;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{RunArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "lj-homographic", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a circular solution and check it against the equations of motion.
    VerifyCircular(RunArgs),
    /// Locate the thresholds lambda_1, lambda_2 and lambda_0.
    Thresholds(RunArgs),
    /// Integrate the radial system and reconstruct the non-circular orbit.
    Radial(RunArgs),
    /// Integrate the full system from a circular configuration.
    Integrate(RunArgs),
    /// Tabulate the circular and radial quantities over a lambda range.
    Sweep(RunArgs),
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let (args, cmd): (RunArgs, fn(&RunConfig) -> anyhow::Result<u8>) = match cli.command {
        Command::VerifyCircular(a) => (a, commands::verify_circular_cmd),
        Command::Thresholds(a) => (a, commands::thresholds_cmd),
        Command::Radial(a) => (a, commands::radial_cmd),
        Command::Integrate(a) => (a, commands::integrate_cmd),
        Command::Sweep(a) => (a, commands::sweep_cmd),
    };
    cmd(&RunConfig::resolve(args)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::code_of(&err))
        }
    }
}

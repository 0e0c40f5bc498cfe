//! `nlbif`: bifurcation analysis for `∇·(a∇u + u Φ∗∇u) = 0` on the torus.
//!
//! Exit status: 0 when every certificate passes, 1 on numerical failure
//! (non-convergence or a tolerance not met), 2 on invalid input.

mod commands;
mod kernel_file;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Status, UsageError};
use kernel_file::KernelFileError;

#[derive(Debug, Parser)]
#[command(name = "nlbif", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bifurcation candidates, hypothesis (H), transversality and linear
    /// uniqueness for a kernel file.
    AnalyzeKernel(commands::analyze::Args),
    /// Build one member of the closed-form family for Φ = 2cos(2πx).
    ConstructExplicit(commands::explicit::Args),
    /// Trace the bifurcating branch by Newton continuation.
    TraceBranch(commands::branch::Args),
    /// Compare the traced branch with the closed-form family.
    CrossValidate(commands::cross::Args),
    /// Re-check the residual of a saved family member.
    Verify(commands::verify::Args),
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    match cli.command {
        Command::AnalyzeKernel(args) => commands::analyze::run(args),
        Command::ConstructExplicit(args) => commands::explicit::run(args),
        Command::TraceBranch(args) => commands::branch::run(args),
        Command::CrossValidate(args) => commands::cross::run(args),
        Command::Verify(args) => commands::verify::run(args),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on its own parse errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            let input = err
                .chain()
                .any(|e| e.is::<UsageError>() || e.is::<KernelFileError>());
            ExitCode::from(if input { 2 } else { 1 })
        }
    }
}

//! Experiment runner around `gradsys-core`: config parsing, run/sweep
//! dispatch, CSV emission. The binary is a thin wrapper over [`execute`].

pub mod config;
pub mod csvout;
pub mod experiment;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use experiment::Outcome;

#[derive(Parser, Debug)]
#[command(
    name = "gradsys",
    about = "Fixed-point existence runs, threshold functionals, and sweeps for an elliptic system with gradient nonlinearity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory (overrides the config's out_dir)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Echo per-iteration progress to stderr
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the experiment described by a config file
    Run { config: PathBuf },
    /// Sweep a (lambda, alpha) grid or bisect the divergence boundary
    Sweep { config: PathBuf },
}

/// Exit status: 0 on success, 2 when the run diverged, 1 on any error.
pub fn execute(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Run { config } => experiment::run(config, cli.out.as_deref(), cli.verbose),
        Command::Sweep { config } => experiment::sweep(config, cli.out.as_deref(), cli.verbose),
    };
    match result {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Diverged) => 2,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

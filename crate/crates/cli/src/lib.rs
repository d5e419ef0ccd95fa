//! Command-line front end: graph file IO, run manifests and the
//! `compare`, `simulate`, `mirror` and `embed` commands.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "netshift",
    version,
    about = "Vertex-wise shift detection between networks"
)]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "NETSHIFT_THREADS")]
    pub threads: Option<usize>,
    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    Compare(commands::compare::CompareArgs),
    Simulate(commands::simulate::SimulateArgs),
    Mirror(commands::mirror::MirrorArgs),
    Embed(commands::embed::EmbedArgs),
}

impl Command {
    fn out_dir(&self) -> &PathBuf {
        match self {
            Self::Compare(a) => &a.output.out,
            Self::Simulate(a) => &a.output.out,
            Self::Mirror(a) => &a.output.out,
            Self::Embed(a) => &a.output.out,
        }
    }
}

/// Runs a parsed command line and writes its outputs. Nothing is written
/// unless the whole computation succeeds.
pub fn execute(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::input("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(io::internal)?;
    }
    let outputs = match &cli.command {
        Command::Compare(a) => commands::compare::run(a)?,
        Command::Simulate(a) => commands::simulate::run(a)?,
        Command::Mirror(a) => commands::mirror::run(a)?,
        Command::Embed(a) => commands::embed::run(a)?,
    };
    outputs.commit(cli.command.out_dir())
}

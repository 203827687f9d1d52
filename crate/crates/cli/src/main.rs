//! `tp-eqln`: generate demonstrations, train, extract equations, evaluate
//! and ablate.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric divergence,
//! 4 I/O or file-format error.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tp_eqln::Error;

use commands::{AblateArgs, EvalArgs, ExtractArgs, GenDataArgs, TrainCmdArgs};

#[derive(Debug, Parser)]
#[command(name = "tp-eqln", version, about = "Task-parameterized equation learner networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic demonstration dataset.
    GenData(GenDataArgs),
    /// Train a network with the three-phase schedule.
    Train(TrainCmdArgs),
    /// Read the learned equations off a model.
    Extract(ExtractArgs),
    /// Score a model on a dataset's demonstrations.
    Eval(EvalArgs),
    /// Train with unit families removed and compare.
    Ablate(AblateArgs),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidSpec(_) | Error::Dimension { .. } => 2,
        Error::Diverged { .. } => 3,
        Error::Io { .. }
        | Error::Json(_)
        | Error::Parse { .. }
        | Error::Version { .. }
        | Error::Dataset(_)
        | Error::Expression { .. } => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenData(a) => commands::gen_data(a),
        Command::Train(a) => commands::train_cmd(a),
        Command::Extract(a) => commands::extract_cmd(a),
        Command::Eval(a) => commands::eval_cmd(a),
        Command::Ablate(a) => commands::ablate_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

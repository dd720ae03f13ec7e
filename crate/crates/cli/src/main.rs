mod args;
mod commands;
mod error;
mod io;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Context(a) => commands::context(a),
        Command::Featurize(a) => commands::featurize(a),
        Command::Cv(a) => commands::cv(a),
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Verify(a) => commands::verify(a),
        Command::Eval(a) => commands::eval(a),
        Command::Rank(a) => commands::rank(a),
        Command::Pipeline(a) => commands::pipeline(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("sift: error: {e}");
            ExitCode::from(commands::EXIT_INPUT)
        }
    }
}

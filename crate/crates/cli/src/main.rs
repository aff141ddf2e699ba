mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::{run_ellipticity, run_eval, run_sample, run_verify, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    let outcome = std::panic::catch_unwind(|| match &cli.command {
        Command::Eval { input, out } => run_eval(input, out.as_deref()),
        Command::Verify {
            target,
            input,
            sampling,
            tol,
            out,
        } => run_verify(*target, input.as_deref(), sampling, *tol, out.as_deref()),
        Command::Ellipticity {
            input,
            tol,
            samples,
            seed,
            out,
        } => run_ellipticity(input, *tol, *samples, *seed, out.as_deref()),
        Command::Sample {
            target,
            sampling,
            out,
        } => run_sample(*target, sampling, out.as_deref()),
    })
    .unwrap_or_else(|_| {
        Err(CliError {
            kind: "internal",
            message: "evaluation aborted".into(),
        })
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}

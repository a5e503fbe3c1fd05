mod commands;
mod options;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use options::Cli;

/// Exit statuses: 0 success, 1 usage error, 2 data error.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
}

impl From<roleinduce::Error> for Failure {
    fn from(e: roleinduce::Error) -> Self {
        match e {
            roleinduce::Error::Config(m) => Failure::Usage(m),
            other => Failure::Data(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

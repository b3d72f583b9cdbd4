mod commands;
mod config;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use commands::Status;
use config::{Cli, RunConfig};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = cli.command.kind();
    let cfg = match RunConfig::resolve(kind, flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match commands::run(&cfg) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NumericalFailure) => {
            eprintln!("some points failed numerically; see manifest.json");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Ok(Status::OracleMismatch) => {
            eprintln!("free-fermion and ED results disagree beyond tolerance; see compare.csv");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e.chain().any(|c| c.downcast_ref::<tsi_chain::Error>().is_some());
            ExitCode::from(if numerical { EXIT_NUMERICAL } else { EXIT_IO })
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use xlayer::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse()).into()
}

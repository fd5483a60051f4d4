use std::process::ExitCode;

use clap::Parser;
use trigsigma::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}

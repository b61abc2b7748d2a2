use std::process::ExitCode;

use clap::Parser;
use hilbert_pair::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}

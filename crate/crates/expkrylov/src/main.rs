use std::process::ExitCode;

use clap::Parser;
use expkrylov::cli::{dispatch, Cli};

fn main() -> ExitCode {
    let code = dispatch(Cli::parse());
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}

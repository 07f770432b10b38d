use std::io;
use std::process::ExitCode;

use adlgen::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = run(cli, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(u8::try_from(status).unwrap_or(1))
}

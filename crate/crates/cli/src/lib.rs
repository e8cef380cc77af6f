//! Library side of the `tmtc` binary, exposed so integration tests can read
//! the typed reports back.

pub mod args;
pub mod commands;
pub mod config;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use commands::Failure;
pub use config::{Flags, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match commands::execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("error: {failure:#}");
            failure.code()
        }
    }
}

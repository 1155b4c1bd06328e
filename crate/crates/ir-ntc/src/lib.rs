//! Command-line lab for incremental-redundancy feedback systems.
//!
//! Wraps the numerical core with argument parsing, JSON configuration,
//! CSV output, multi-threaded Monte-Carlo and reproduction recipes.

#![forbid(unsafe_code)]

pub mod analysis;
pub mod commands;
pub mod config;
pub mod parallel;
pub mod recipes;
pub mod table;

use std::ffi::OsString;
use std::io::Write;

use anyhow::Result;
use clap::Parser;

use commands::{out_path, run_table, Cli, Command};

/// Parses `argv` (including the program name), runs the subcommand and
/// writes its CSV to `--out` or `stdout`.
pub fn main_with_args<W: Write>(argv: Vec<OsString>, stdout: W) -> Result<()> {
    let argv = config::expand_config(argv)?;
    // usage errors, --help and --version print and exit the way clap does
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    match &cli.command {
        Command::Recipe(a) => {
            let m = recipes::run_recipe(a)?;
            eprintln!(
                "{}: {} file(s) in {:.1} s",
                m.preset,
                m.files.len(),
                m.wall_time_s
            );
            Ok(())
        }
        cmd => {
            let table = run_table(cmd)?;
            match out_path(cmd) {
                Some(p) => table.write_csv(std::fs::File::create(p)?),
                None => table.write_csv(stdout),
            }
        }
    }
}

//! Command-line front end: runs computations and convergence studies and
//! writes their records as JSON or CSV.

pub mod commands;
pub mod config;
pub mod error;
pub mod records;

use std::io::Write;
use std::path::PathBuf;

use clap::{CommandFactory, Parser};

pub use config::{Cli, RunConfig, Subcommand};
pub use error::{CliError, Result};
pub use records::{emit, parse, parse_rows, Format, RecordSet, Row, Value};

fn write_output(cfg: &RunConfig, set: &RecordSet, env_dir: Option<PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    match cfg.output_path(env_dir) {
        None => emit(set, cfg.format, stdout),
        Some(path) => {
            let io = |source| CliError::Io {
                path: path.clone(),
                source,
            };
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(io)?;
            }
            let mut buf = Vec::new();
            emit(set, cfg.format, &mut buf)?;
            std::fs::write(&path, buf).map_err(io)
        }
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code:
/// 0 on success, 1 on invalid input, 2 on numerical failure.
pub fn main_with<I, S>(args: I, env_dir: Option<PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let _ = write!(stderr, "{}\n{}", e.render(), Cli::command().render_usage());
            return 1;
        }
    };
    let outcome = RunConfig::from_cli(cli).and_then(|cfg| {
        let (set, status) = commands::run(&cfg)?;
        write_output(&cfg, &set, env_dir, stdout)?;
        match status {
            Some(e) => Err(e),
            None => Ok(()),
        }
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

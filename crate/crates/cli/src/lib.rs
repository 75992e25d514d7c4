//! Library side of the `sfa` binary, so tests can drive the commands
//! without spawning processes.

pub mod args;
pub mod commands;
pub mod error;
pub mod report;
pub mod settings;

use std::ffi::OsString;

use clap::Parser;

pub use args::{Cli, Command, Format};
pub use error::CliError;
pub use settings::{Point, Settings};

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 success, 1 tolerance failure, 2 usage error, 3 resource limit.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let env = std::env::var(settings::ENV_MAX_TRANSIENT).ok();
    match execute(&cli, env.as_deref()) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command line and writes its report. Returns whether every
/// check in the report passed.
pub fn execute(cli: &Cli, env_transient: Option<&str>) -> Result<bool, CliError> {
    let settings = Settings::resolve(&cli.opts, env_transient)?;
    match &cli.command {
        Command::Check(a) => {
            let (rows, passed) = commands::check::run(&settings, a)?;
            report::emit(&settings, "check", passed, &rows)?;
            Ok(passed)
        }
        Command::Bench(a) => {
            let rows = commands::bench::run(&settings, a)?;
            report::emit(&settings, "bench", true, &rows)?;
            Ok(true)
        }
        Command::GradCheck(a) => {
            let (rows, passed) = commands::grad_check::run(&settings, a)?;
            report::emit(&settings, "grad-check", passed, &rows)?;
            Ok(passed)
        }
        Command::Analyze(a) => {
            let rows = commands::analyze::run(&settings, a)?;
            report::emit(&settings, "analyze", true, &rows)?;
            Ok(true)
        }
        Command::CostModel(a) => {
            let rows = commands::cost_model::run(&settings, a)?;
            report::emit(&settings, "cost-model", true, &rows)?;
            Ok(true)
        }
    }
}

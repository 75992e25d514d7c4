//! Report emission. JSON reports wrap the rows with run metadata; CSV
//! reports are the bare rows with a header line.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::args::Format;
use crate::error::CliError;
use crate::settings::Settings;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Report<'a, R> {
    pub tool: &'static str,
    pub schema_version: u32,
    pub command: &'a str,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: u64,
    pub passed: bool,
    pub rows: &'a [R],
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("cannot write report: {e}"))
}

pub fn write_rows<R: Serialize, W: Write>(
    w: W,
    format: Format,
    command: &str,
    passed: bool,
    rows: &[R],
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let report = Report {
                tool: "sfa",
                schema_version: SCHEMA_VERSION,
                command,
                timestamp: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                passed,
                rows,
            };
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, &report).map_err(io_err)?;
            writeln!(w).map_err(io_err)
        }
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(w);
            for r in rows {
                wr.serialize(r).map_err(io_err)?;
            }
            wr.flush().map_err(io_err)
        }
    }
}

/// Writes to `--out` if given, else stdout.
pub fn emit<R: Serialize>(
    settings: &Settings,
    command: &str,
    passed: bool,
    rows: &[R],
) -> Result<(), CliError> {
    match &settings.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(io_err)?;
            write_rows(std::io::BufWriter::new(file), settings.format, command, passed, rows)
        }
        None => write_rows(std::io::stdout().lock(), settings.format, command, passed, rows),
    }
}

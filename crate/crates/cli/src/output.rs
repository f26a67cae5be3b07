//! Writing rows as CSV or JSON to a file or stdout.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?} (expected csv or json)")),
        }
    }
}

/// Opens `path` for writing, or stdout when no path is given.
pub fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

pub fn write_csv<T: Serialize>(w: impl Write, rows: &[T]) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush().map_err(|e| CliError::io("<output>", e))?;
    Ok(())
}

/// JSON document `{"meta": ..., "rows": [...]}`; `rows` is the data section.
pub fn write_json<M: Serialize, T: Serialize>(mut w: impl Write, meta: &M, rows: &[T]) -> CliResult<()> {
    #[derive(Serialize)]
    struct Doc<'a, M, T> {
        meta: &'a M,
        rows: &'a [T],
    }
    serde_json::to_writer_pretty(&mut w, &Doc { meta, rows })?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io("<output>", e))?;
    Ok(())
}

pub fn write_rows<M: Serialize, T: Serialize>(path: Option<&Path>, format: Format, meta: &M, rows: &[T]) -> CliResult<()> {
    let w = sink(path)?;
    match format {
        Format::Csv => write_csv(w, rows),
        Format::Json => write_json(w, meta, rows),
    }
}

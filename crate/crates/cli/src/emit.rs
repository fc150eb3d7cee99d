//! Writing reports and plot data.

use std::fs;
use std::io::Write;
use std::path::Path;

use distfix::CheckReport;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// The serialized report, newline-terminated.
pub fn render(report: &CheckReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    }
}

/// Write `text` to `path`, or to stdout when `path` is `None`.
pub fn write_output(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

pub fn emit(report: &CheckReport, path: Option<&Path>, format: Format) -> Result<()> {
    write_output(&render(report, format), path)
}

/// CSV with the given header over rows of three numbers.
pub fn plot_csv(header: [&str; 3], rows: &[[f64; 3]]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_csv_has_header_and_rows() {
        let s = plot_csv(["x", "a", "b"], &[[0.0, 0.5, 0.25], [1.0, 1.0, 1.0]]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines, ["x,a,b", "0.0,0.5,0.25", "1.0,1.0,1.0"]);
    }
}

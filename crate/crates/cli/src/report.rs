//! Report assembly and output: one JSON document on stdout, or CSV/SVG
//! artifacts written into the output directory. Every chart has a sibling
//! CSV with the same stem carrying the exact plotted numbers.

use crate::errors::{CliError, CliResult};
use crate::svg::Chart;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub input: String,
    pub x: Option<String>,
    pub y: Option<String>,
    pub m: usize,
    pub start: String,
    pub estimator: String,
    pub format: String,
    pub select: String,
    pub seed: u64,
    pub out: Option<String>,
    pub gof: bool,
}

#[derive(Serialize)]
pub struct Report {
    pub command: String,
    pub config: ConfigEcho,
    pub results: serde_json::Value,
    pub warnings: Vec<String>,
}

/// A named CSV table; the name is the file stem.
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Full-precision cell rendering (shortest representation that round-trips).
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// One chart plus the stem shared with its sibling CSV.
pub struct NamedChart {
    pub name: String,
    pub chart: Chart,
}

pub struct CommandOutput {
    pub results: serde_json::Value,
    pub warnings: Vec<String>,
    pub tables: Vec<Table>,
    pub charts: Vec<NamedChart>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Svg,
}

/// Writes the report per the requested format; returns what was printed to
/// stdout (for tests).
pub fn emit(
    command: &str,
    config: ConfigEcho,
    format: OutputFormat,
    out_dir: Option<&Path>,
    output: CommandOutput,
) -> CliResult<String> {
    let report = Report {
        command: command.to_string(),
        config,
        results: output.results,
        warnings: output.warnings,
    };
    match format {
        OutputFormat::Json => {
            let doc = serde_json::to_string(&report)
                .map_err(|e| CliError::Data(format!("serialization: {e}")))?;
            if let Some(dir) = out_dir {
                write_file(dir, &format!("{command}.json"), &doc)?;
            }
            Ok(format!("{doc}\n"))
        }
        OutputFormat::Csv => {
            let dir = out_dir.map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
            let mut printed = String::new();
            for table in &output.tables {
                let path = write_file(&dir, &format!("{}.csv", table.name), &table.to_csv())?;
                printed.push_str(&format!("{path}\n"));
            }
            for w in &report.warnings {
                printed.push_str(&format!("warning: {w}\n"));
            }
            Ok(printed)
        }
        OutputFormat::Svg => {
            let dir = out_dir.map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
            let mut printed = String::new();
            for table in &output.tables {
                let path = write_file(&dir, &format!("{}.csv", table.name), &table.to_csv())?;
                printed.push_str(&format!("{path}\n"));
            }
            for named in &output.charts {
                let path = write_file(&dir, &format!("{}.svg", named.name), &named.chart.render())?;
                printed.push_str(&format!("{path}\n"));
            }
            for w in &report.warnings {
                printed.push_str(&format!("warning: {w}\n"));
            }
            Ok(printed)
        }
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> CliResult<String> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    Ok(path.display().to_string())
}

/// File-stem-safe version of a column name.
pub fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

//! CSV ingestion: header row required, numeric cells, NA-aware.

use crate::errors::{CliError, CliResult};
use std::path::Path;

/// A parse failure at one cell; the cell is treated as missing.
#[derive(Debug, Clone)]
pub struct ParseFailure {
    /// 1-based data row (header excluded).
    pub row: usize,
    pub column: String,
    pub content: String,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub names: Vec<String>,
    /// Column-major cells; `None` marks a missing value.
    pub columns: Vec<Vec<Option<f64>>>,
    pub n_rows: usize,
    pub parse_failures: Vec<ParseFailure>,
}

const NA_TOKENS: [&str; 5] = ["", "na", "nan", "n/a", "null"];

impl Dataset {
    pub fn load(path: &Path) -> CliResult<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let names: Vec<String> = reader
            .headers()?
            .iter()
            .map(|h| h.to_string())
            .collect();
        if names.is_empty() {
            return Err(CliError::Data(format!(
                "{}: no header row",
                path.display()
            )));
        }
        let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
        let mut parse_failures = Vec::new();
        let mut n_rows = 0usize;
        for (r, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != names.len() {
                return Err(CliError::Data(format!(
                    "row {}: expected {} cells, found {}",
                    r + 1,
                    names.len(),
                    record.len()
                )));
            }
            n_rows += 1;
            for (c, cell) in record.iter().enumerate() {
                let value = if NA_TOKENS.contains(&cell.to_ascii_lowercase().as_str()) {
                    None
                } else {
                    match cell.parse::<f64>() {
                        Ok(v) if v.is_finite() => Some(v),
                        _ => {
                            parse_failures.push(ParseFailure {
                                row: r + 1,
                                column: names[c].clone(),
                                content: cell.to_string(),
                            });
                            None
                        }
                    }
                };
                columns[c].push(value);
            }
        }
        if n_rows == 0 {
            return Err(CliError::Data(format!(
                "{}: no data rows",
                path.display()
            )));
        }
        Ok(Self {
            names,
            columns,
            n_rows,
            parse_failures,
        })
    }

    pub fn column_index(&self, name: &str) -> CliResult<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| {
                CliError::Data(format!(
                    "unknown column '{name}' (available: {})",
                    self.names.join(", ")
                ))
            })
    }

    /// Complete cases of one column, plus the count of dropped rows.
    pub fn complete_column(&self, idx: usize) -> (Vec<f64>, usize) {
        let values: Vec<f64> = self.columns[idx].iter().filter_map(|&v| v).collect();
        let dropped = self.n_rows - values.len();
        (values, dropped)
    }

    /// Pairwise-complete cases of two columns, plus the dropped-row count.
    pub fn complete_pair(&self, ix: usize, iy: usize) -> (Vec<f64>, Vec<f64>, usize) {
        let mut xs = Vec::with_capacity(self.n_rows);
        let mut ys = Vec::with_capacity(self.n_rows);
        for r in 0..self.n_rows {
            if let (Some(x), Some(y)) = (self.columns[ix][r], self.columns[iy][r]) {
                xs.push(x);
                ys.push(y);
            }
        }
        let dropped = self.n_rows - xs.len();
        (xs, ys, dropped)
    }

    /// Warnings for parse failures, with row numbers.
    pub fn parse_warnings(&self) -> Vec<String> {
        self.parse_failures
            .iter()
            .map(|f| {
                format!(
                    "row {} column '{}': cell '{}' is not numeric, treated as missing",
                    f.row, f.column, f.content
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(tag: &str, content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir();
        let path = dir.join(format!("lpstat_test_{tag}_{}.csv", std::process::id()));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_csv_with_missing_and_bad_cells() {
        let path = write_temp("load", "a,b\n1.5,2\nNA,3\n2.5,oops\n4,5\n");
        let ds = Dataset::load(&path).unwrap();
        assert_eq!(ds.names, vec!["a", "b"]);
        assert_eq!(ds.n_rows, 4);
        let (a, dropped_a) = ds.complete_column(0);
        assert_eq!(a, vec![1.5, 2.5, 4.0]);
        assert_eq!(dropped_a, 1);
        let (x, y, dropped) = ds.complete_pair(0, 1);
        assert_eq!(x, vec![1.5, 4.0]);
        assert_eq!(y, vec![2.0, 5.0]);
        assert_eq!(dropped, 2);
        let warnings = ds.parse_warnings();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("row 3"));
        assert!(warnings[0].contains("oops"));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn unknown_column_is_a_data_error() {
        let path = write_temp("col", "a,b\n1,2\n");
        let ds = Dataset::load(&path).unwrap();
        assert!(matches!(ds.column_index("zzz"), Err(CliError::Data(_))));
        std::fs::remove_file(path).ok();
    }
}

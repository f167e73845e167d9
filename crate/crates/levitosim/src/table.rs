//! Result tables and deterministic CSV emission.

use std::io::Write;
use std::path::Path;

use crate::{CliError, Result};

/// Column-ordered table of optional floats; `None` marks an intentionally
/// empty cell (e.g. entanglement columns of an unstable sweep point).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Option<f64>>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(CliError::Numeric(format!(
                "row width {} does not match {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for (cell, name) in row.iter().zip(&self.columns) {
            if let Some(v) = cell {
                if !v.is_finite() {
                    return Err(CliError::Numeric(format!(
                        "non-finite value in column `{name}`"
                    )));
                }
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.rows
    }

    /// Serialize as CSV: RFC-4180-style quoting, floats at 17 significant
    /// digits, byte-deterministic for a fixed table.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            &self
                .columns
                .iter()
                .map(|c| quote_field(c))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for row in &self.rows {
            let line = row
                .iter()
                .map(|cell| match cell {
                    Some(v) => format_float(*v),
                    None => String::new(),
                })
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| {
            CliError::Config(format!("cannot create {}: {e}", path.display()))
        })?;
        file.write_all(self.to_csv().as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }
}

/// 17 significant digits: lossless for every f64.
fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn quote_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

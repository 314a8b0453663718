//! Column-oriented numeric tables and their CSV form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// A series sampled on a shared abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    /// Name of the abscissa column.
    pub variable: String,
    pub grid: Vec<f64>,
    pub columns: Vec<Column>,
}

impl Table {
    pub fn new(variable: &str, grid: Vec<f64>) -> Self {
        Table {
            variable: variable.to_string(),
            grid,
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.grid.len());
        self.columns.push(Column {
            name: name.to_string(),
            values,
        });
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    /// Writes a header row and one row per grid point, every value with
    /// seventeen significant digits so the file parses back exactly.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let to_io = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(e) => CliError::io(path, e),
            other => CliError::malformed(path, format!("{other:?}")),
        };
        let mut w = csv::Writer::from_path(path).map_err(to_io)?;
        let header = std::iter::once(self.variable.as_str())
            .chain(self.columns.iter().map(|c| c.name.as_str()));
        w.write_record(header).map_err(to_io)?;
        for (j, x) in self.grid.iter().enumerate() {
            let row = std::iter::once(*x)
                .chain(self.columns.iter().map(|c| c.values[j]))
                .map(|v| format!("{v:.16e}"));
            w.write_record(row).map_err(to_io)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| CliError::malformed(path, e))?;
        let header: Vec<String> = r
            .headers()
            .map_err(|e| CliError::malformed(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let Some((variable, names)) = header.split_first() else {
            return Err(CliError::malformed(path, "empty header"));
        };
        let mut table = Table::new(variable, Vec::new());
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for (line, record) in r.records().enumerate() {
            let record = record.map_err(|e| CliError::malformed(path, e))?;
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    CliError::malformed(
                        path,
                        format!("row {}: `{field}` is not a number", line + 2),
                    )
                })?;
                if j == 0 {
                    table.grid.push(v);
                } else {
                    columns[j - 1].push(v);
                }
            }
        }
        for (name, values) in names.iter().zip(columns) {
            table.push(name, values);
        }
        Ok(table)
    }
}

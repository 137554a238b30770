//! Tabular results and their CSV / JSON encodings.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    /// Undefined at this row (serialized as an empty CSV field or `null`).
    Empty,
}

impl Cell {
    fn csv_field(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalars worth surfacing on their own (observed orders, warnings, ...).
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            command,
            columns,
            rows: Vec::new(),
            summary: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Refuses to emit NaN or infinite values.
    pub fn check_finite(&self) -> Result<(), CliError> {
        for (i, row) in self.rows.iter().enumerate() {
            for (cell, col) in row.iter().zip(&self.columns) {
                if let Cell::Num(x) = cell {
                    if !x.is_finite() {
                        return Err(CliError::Engine(cbfem::Error::Domain(format!(
                            "non-finite {col} in output row {i}"
                        ))));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn write(&self, format: Format, cfg: &RunConfig, out: impl Write) -> Result<(), CliError> {
        self.check_finite()?;
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(cfg, out),
        }
    }

    fn write_csv(&self, out: impl Write) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    fn write_json(&self, cfg: &RunConfig, mut out: impl Write) -> Result<(), CliError> {
        let rows: Vec<Map<String, Value>> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| Ok((c.to_string(), serde_json::to_value(v)?)))
                    .collect::<Result<_, serde_json::Error>>()
            })
            .collect::<Result<_, _>>()?;
        let doc = json!({
            "command": self.command,
            "config": cfg,
            "summary": self.summary,
            "rows": rows,
        });
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out).map_err(|source| CliError::Io {
            path: "output".into(),
            source,
        })?;
        Ok(())
    }
}

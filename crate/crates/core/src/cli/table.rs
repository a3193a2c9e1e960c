use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Tabular output written as CSV or as a JSON array of row objects.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(columns: Vec<String>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let fail = |e: csv::Error| CliError::numerical(format!("cannot encode CSV: {e}"));
                w.write_record(&self.columns).map_err(fail)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(|c| match c {
                        Cell::Num(v) => v.to_string(),
                        Cell::Int(v) => v.to_string(),
                        Cell::Text(s) => s.clone(),
                    }))
                    .map_err(fail)?;
                }
                w.into_inner().map_err(|e| CliError::numerical(format!("cannot encode CSV: {e}")))
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let mut m = Map::new();
                        for (k, c) in self.columns.iter().zip(r) {
                            let v = match c {
                                Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
                                Cell::Int(v) => Value::from(*v),
                                Cell::Text(s) => Value::from(s.clone()),
                            };
                            m.insert(k.clone(), v);
                        }
                        Value::Object(m)
                    })
                    .collect();
                let mut out = serde_json::to_vec_pretty(&rows).expect("serialisable");
                out.write_all(b"\n").expect("in-memory write");
                Ok(out)
            }
        }
    }
}

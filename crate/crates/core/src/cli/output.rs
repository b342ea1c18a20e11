//! Result tables and their CSV / JSON renderings.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::symbolic::Ratio;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(_) => Value::Null,
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Numerator and denominator cells of an optional rational.
pub fn ratio_cells(r: Option<Ratio>) -> [Cell; 2] {
    match r {
        Some(r) => [Cell::Int(*r.numer()), Cell::Int(*r.denom())],
        None => [Cell::Empty, Cell::Empty],
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Output format selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// A payload table together with its run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub command: String,
    pub config: Value,
    pub config_hash: String,
    pub wall_time_s: f64,
    /// Command-specific metadata (kept out of the payload table).
    pub extra: Map<String, Value>,
    pub table: Table,
}

impl ResultBundle {
    pub fn metadata(&self) -> Value {
        let mut m = Map::new();
        m.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("command".into(), json!(self.command));
        m.insert("config".into(), self.config.clone());
        m.insert("config_hash".into(), json!(self.config_hash));
        m.insert("columns".into(), json!(self.table.columns));
        m.insert("wall_time_s".into(), json!(self.wall_time_s));
        for (k, v) in &self.extra {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }

    /// CSV: a `#` comment line with the config hash, a header, then rows.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut out = format!("# {} config_hash={}\n", env!("CARGO_PKG_NAME"), self.config_hash).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            let io = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(&self.table.columns).map_err(io)?;
            for row in &self.table.rows {
                w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
            }
            w.flush()?;
        }
        Ok(out)
    }

    /// JSON: `{"metadata": ..., "rows": [...]}` with one object per row.
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let rows: Vec<Value> = self
            .table
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> =
                    self.table.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                Value::Object(m)
            })
            .collect();
        let doc = json!({ "metadata": self.metadata(), "rows": rows });
        let mut text = serde_json::to_vec_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
        text.push(b'\n');
        Ok(text)
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

//! Tabular output. Every command produces one `Table`; the writer turns
//! it into RFC 4180 CSV or a JSON array of row objects, plus a manifest
//! echoing the inputs that produced it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    UInt(u64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            // shortest round-trip repr; '.' decimal separator by construction
            Cell::Float(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json_value(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::UInt(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        match v {
            Some(x) => x.into(),
            None => Cell::Empty,
        }
    }
}

#[derive(Debug)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Column indices (x, y) for the optional plot.
    pub plot: Option<(usize, usize)>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            plot: None,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn with_plot(mut self, x: usize, y: usize) -> Self {
        self.plot = Some((x, y));
        self
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.csv_text()))?;
        }
        let bytes = w.into_inner().context("csv flush")?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    obj.insert(name.clone(), cell.json_value());
                }
                Value::Object(obj)
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&rows)?;
        text.push('\n');
        Ok(text)
    }

    /// (x, y) pairs for the plot columns, skipping non-numeric cells.
    pub fn plot_points(&self) -> Vec<(f64, f64)> {
        let Some((xi, yi)) = self.plot else { return Vec::new() };
        let as_f64 = |c: &Cell| match *c {
            Cell::Int(v) => Some(v as f64),
            Cell::UInt(v) => Some(v as f64),
            Cell::Float(v) if v.is_finite() => Some(v),
            _ => None,
        };
        self.rows
            .iter()
            .filter_map(|row| Some((as_f64(&row[xi])?, as_f64(&row[yi])?)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: Format,
    pub plot: bool,
    /// Full command line echoed into the manifest, e.g. "extremal nterm".
    pub command: String,
    pub config_bytes: Vec<u8>,
    pub tol: f64,
    pub seed: u64,
}

/// Writes table, manifest and optional plot; returns the table path.
pub fn write_outputs(spec: &OutputSpec, table: &Table) -> Result<PathBuf> {
    std::fs::create_dir_all(&spec.dir)
        .with_context(|| format!("cannot create output dir {}", spec.dir.display()))?;
    let stem = spec.command.replace(' ', "-");

    let table_path = match spec.format {
        Format::Csv => {
            let path = spec.dir.join(format!("{stem}.csv"));
            std::fs::write(&path, table.to_csv()?)?;
            path
        }
        Format::Json => {
            let path = spec.dir.join(format!("{stem}.json"));
            std::fs::write(&path, table.to_json()?)?;
            path
        }
    };

    let mut hasher = Sha256::new();
    hasher.update(&spec.config_bytes);
    let digest = hasher.finalize();
    let mut config_hash = String::with_capacity(64);
    for byte in digest {
        let _ = write!(config_hash, "{byte:02x}");
    }

    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": spec.command,
        "config-hash": config_hash,
        "tolerances": { "tol": spec.tol },
        "seed": spec.seed,
    });
    let mut manifest_text = serde_json::to_string_pretty(&manifest)?;
    manifest_text.push('\n');
    std::fs::write(spec.dir.join(format!("{stem}-manifest.json")), manifest_text)?;

    if spec.plot {
        let points = table.plot_points();
        if !points.is_empty() {
            let svg = crate::svg::polyline(&points, &spec.command);
            std::fs::write(spec.dir.join(format!("{stem}.svg")), svg)?;
        }
    }

    Ok(table_path)
}

pub fn print_table(table: &Table, format: Format) -> Result<()> {
    let text = match format {
        Format::Csv => table.to_csv()?,
        Format::Json => table.to_json()?,
    };
    print!("{text}");
    Ok(())
}

#[allow(dead_code)]
fn path_str(p: &Path) -> String {
    p.display().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_escapes_and_headers() {
        let mut t = Table::new(vec!["n", "label"]);
        t.push(vec![Cell::UInt(1), Cell::Text("a,b".into())]);
        let csv = t.to_csv().unwrap();
        assert_eq!(csv, "n,label\r\n1,\"a,b\"\r\n");
    }

    #[test]
    fn float_cells_round_trip() {
        let mut t = Table::new(vec!["x"]);
        let v = 0.1 + 0.2;
        t.push(vec![Cell::Float(v)]);
        let csv = t.to_csv().unwrap();
        let cell = csv.lines().nth(1).unwrap();
        assert_eq!(cell.parse::<f64>().unwrap(), v);
    }

    #[test]
    fn json_rows_are_objects() {
        let mut t = Table::new(vec!["n", "value", "flag"]);
        t.push(vec![Cell::UInt(3), Cell::Float(0.5), Cell::Empty]);
        let parsed: serde_json::Value = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(parsed[0]["n"], 3);
        assert_eq!(parsed[0]["value"], 0.5);
        assert!(parsed[0]["flag"].is_null());
    }

    #[test]
    fn plot_points_skip_gaps() {
        let mut t = Table::new(vec!["n", "v"]).with_plot(0, 1);
        t.push(vec![Cell::UInt(1), Cell::Float(2.0)]);
        t.push(vec![Cell::UInt(2), Cell::Empty]);
        t.push(vec![Cell::UInt(3), Cell::Float(4.0)]);
        assert_eq!(t.plot_points(), vec![(1.0, 2.0), (3.0, 4.0)]);
    }
}

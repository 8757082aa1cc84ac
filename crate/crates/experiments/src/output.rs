//! Tables, reports and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
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

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Missing,
}

impl Cell {
    fn text(self) -> String {
        match self {
            Cell::Float(x) => x.to_string(),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(self) -> serde_json::Value {
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Int(n) => n.into(),
            Cell::Bool(b) => b.into(),
            Cell::Missing => serde_json::Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}
impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}
impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}
impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}
impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }
}

/// Rectangular table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.text())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| serde_json::Value::Object(self.columns.iter().zip(row).map(|(k, c)| (k.to_string(), c.json())).collect()))
            .collect();
        serde_json::to_string_pretty(&rows).expect("table serializes") + "\n"
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub format: Format,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(command: &str, format: Format, config: &ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: config.seed,
            format,
            config: config.clone(),
        }
    }
}

/// Writes run outputs into one directory.
pub struct OutputDir {
    root: PathBuf,
    format: Format,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path, format: Format) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), format, written: Vec::new() })
    }

    /// Writes `<stem>.csv` or `<stem>.json` depending on the format.
    pub fn table(&mut self, stem: &str, table: &Table) -> std::io::Result<()> {
        let body = match self.format {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json(),
        };
        self.write(&format!("{stem}.{}", self.format.extension()), body)
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> std::io::Result<()> {
        let body = serde_json::to_string_pretty(value).map_err(std::io::Error::other)? + "\n";
        self.write(name, body)
    }

    fn write(&mut self, name: &str, body: String) -> std::io::Result<()> {
        let path = self.root.join(name);
        fs::write(&path, body)?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

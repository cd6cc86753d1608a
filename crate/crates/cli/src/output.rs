//! Deterministic CSV and JSON writers.
//!
//! CSV: comma separated, one header row, LF line endings, floats with 12
//! significant digits. JSON: one flat object with sorted keys.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Bumped whenever a column or metadata key changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

pub fn float(x: f64) -> String {
    format!("{x:.11e}")
}

/// One CSV cell.
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => float(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns);
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        let _ = writeln!(self.text, "{}", line.join(","));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, &self.text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Flat metadata object; keys are kept sorted.
#[derive(Default)]
pub struct Metadata {
    map: BTreeMap<String, Value>,
    failed: Vec<String>,
}

impl Metadata {
    pub fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.set("command", command);
        m.set("schema_version", SCHEMA_VERSION);
        m
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.map.insert(key.to_string(), value.into());
    }

    pub fn number(&mut self, key: &str, x: f64) {
        // rounded like the CSV columns so reruns are byte-identical
        let v: f64 = float(x).parse().unwrap_or(x);
        self.set(
            key,
            serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number),
        );
    }

    /// Records a convergence or sanity check under `check_<name>`.
    pub fn check(&mut self, name: &str, pass: bool) {
        self.set(&format!("check_{name}"), pass);
        if !pass {
            self.failed.push(name.to_string());
        }
    }

    pub fn failed_checks(&self) -> &[String] {
        &self.failed
    }

    pub fn write(&mut self, path: &Path) -> Result<()> {
        self.set("all_checks_passed", self.failed.is_empty());
        write_json(path, &self.map)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    // serde_json maps are ordered by key, so a round trip through Value
    // sorts struct fields as well
    let v = serde_json::to_value(value)?;
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Creates `dir` (and parents) and returns it.
pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.to_path_buf())
}

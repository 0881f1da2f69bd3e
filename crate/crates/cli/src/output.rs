//! CSV emission and gate logs.
//!
//! Floats are written as `{:.16e}` (17 significant digits), so reruns with
//! the same seed are byte-identical.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use entwalk_core::gates::GateEvent;

use crate::error::{CliError, Result};

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v:.16e}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// Header plus rows, written in one go.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        csv.write_record(&self.header)?;
        for row in &self.rows {
            csv.write_record(row.iter().map(|c| c.to_string()))?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn write_path(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        String::from_utf8(buf).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Column index by header name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }
}

/// One line of a gate log: `realization step control target gate_c gate_t`,
/// where `step` counts from 1.
#[derive(Clone, Debug, PartialEq)]
pub struct GateLogEntry {
    pub realization: usize,
    pub step: usize,
    pub event: GateEvent,
}

impl fmt::Display for GateLogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.realization, self.step, self.event)
    }
}

impl FromStr for GateLogEntry {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<&str> = s.split_whitespace().collect();
        let bad = || CliError::Config(format!("malformed gate-log line {s:?}"));
        if fields.len() != 6 {
            return Err(bad());
        }
        let realization = fields[0].parse().map_err(|_| bad())?;
        let step = fields[1].parse().map_err(|_| bad())?;
        let event = fields[2..].join(" ").parse().map_err(CliError::Core)?;
        Ok(GateLogEntry { realization, step, event })
    }
}

pub fn write_gate_log(path: &Path, entries: &[GateLogEntry]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for e in entries {
        writeln!(w, "{e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a gate log; blank lines and `#` comments are skipped.
pub fn read_gate_log(path: &Path) -> Result<Vec<GateLogEntry>> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        out.push(body.parse()?);
    }
    Ok(out)
}

//! Report envelopes and their CSV/JSON renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One CSV/JSON cell. `NegInf` renders as the literal `-inf` and is only
/// accepted in columns declared for it.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    NegInf,
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(x) => Some(*x),
            Cell::NegInf => Some(f64::NEG_INFINITY),
            Cell::Text(_) => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::NegInf => "-inf".into(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        if x == f64::NEG_INFINITY {
            Cell::NegInf
        } else {
            Cell::Num(x)
        }
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Num(x) => s.serialize_f64(*x),
            Cell::NegInf => s.serialize_str("-inf"),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match Value::deserialize(d)? {
            Value::Number(n) => match n.as_i64() {
                Some(i) => Cell::Int(i),
                None => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
            },
            Value::String(s) if s == "-inf" => Cell::NegInf,
            Value::String(s) => Cell::Text(s),
            other => Cell::Text(other.to_string()),
        })
    }
}

/// Rows with a fixed column set.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    neg_inf_columns: Vec<usize>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            neg_inf_columns: vec![],
            rows: vec![],
        }
    }

    pub fn with_columns(columns: Vec<String>) -> Self {
        Self {
            columns,
            neg_inf_columns: vec![],
            rows: vec![],
        }
    }

    /// Allows `-inf` in the named column.
    pub fn allow_neg_inf(mut self, column: &str) -> Self {
        if let Some(i) = self.columns.iter().position(|c| c == column) {
            self.neg_inf_columns.push(i);
        }
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), CliError> {
        if row.len() != self.columns.len() {
            return Err(CliError::SchemaMismatch(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for (i, cell) in row.iter().enumerate() {
            let ok = match cell {
                Cell::Num(x) => x.is_finite(),
                Cell::NegInf => self.neg_inf_columns.contains(&i),
                _ => true,
            };
            if !ok {
                return Err(CliError::Computation(smb_core::Error::InvalidParameter(format!(
                    "non-finite value in column {}",
                    self.columns[i]
                ))));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub spec_hash: String,
    pub seed: u64,
    pub n: Option<usize>,
    pub samples: Option<usize>,
    pub statistic: Option<f64>,
    pub threshold: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub tool_version: String,
    pub spec_hash: String,
    pub config_echo: Value,
    pub summary: Summary,
    pub pass_flags: BTreeMap<String, bool>,
    pub metadata: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ReportEnvelope {
    pub fn passed(&self) -> bool {
        self.summary.pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::SchemaMismatch(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Writes `<experiment>.csv` and `<experiment>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
        std::fs::create_dir_all(dir)?;
        let table = Table {
            columns: self.columns.clone(),
            neg_inf_columns: vec![],
            rows: self.rows.clone(),
        };
        let csv = dir.join(format!("{}.csv", self.summary.experiment));
        let json = dir.join(format!("{}.json", self.summary.experiment));
        std::fs::write(&csv, table.to_csv())?;
        std::fs::write(&json, self.to_json())?;
        Ok((csv, json))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Finite floats as JSON numbers; anything else is a bug in the caller.
pub fn num(x: f64) -> Value {
    debug_assert!(x.is_finite(), "non-finite metadata value");
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

//! Float formatting and CSV / JSON row writers.

use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?} (expected csv or json)")),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// `shortest` (round-trip) or `fixed:N` decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloatFormat {
    Shortest,
    Fixed(usize),
}

impl FloatFormat {
    pub fn format(self, v: f64) -> String {
        match self {
            FloatFormat::Shortest => shortest(v),
            FloatFormat::Fixed(d) => format!("{v:.d$}"),
        }
    }
}

impl fmt::Display for FloatFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FloatFormat::Shortest => write!(f, "shortest"),
            FloatFormat::Fixed(d) => write!(f, "fixed:{d}"),
        }
    }
}

impl FromStr for FloatFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "shortest" {
            return Ok(FloatFormat::Shortest);
        }
        s.strip_prefix("fixed:")
            .and_then(|d| d.parse().ok())
            .filter(|&d: &usize| d <= 17)
            .map(FloatFormat::Fixed)
            .ok_or_else(|| format!("unknown float format {s:?} (expected shortest or fixed:N)"))
    }
}

impl Serialize for FloatFormat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FloatFormat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shortest decimal that parses back to the same f64; exponent notation
/// outside [1e-5, 1e16).
pub fn shortest(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Int(u64),
    Float(f64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

/// Column headers plus rows of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Fails on the first non-finite float, naming its row.
    pub fn check_finite(&self, name: &str) -> CliResult<()> {
        for (i, row) in self.rows.iter().enumerate() {
            for (col, cell) in self.columns.iter().zip(row) {
                if let Cell::Float(v) = cell {
                    if !v.is_finite() {
                        let desc: Vec<String> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, cell)| format!("{c}={}", plain(cell)))
                            .collect();
                        return Err(CliError::NonFinite {
                            row: format!("{name} row {} column {col} ({})", i + 1, desc.join(", ")),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self, ff: FloatFormat) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| render(c, ff, false)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, ff: FloatFormat) -> String {
        let mut out = String::from("[\n");
        for (i, row) in self.rows.iter().enumerate() {
            let fields: Vec<String> = self
                .columns
                .iter()
                .zip(row)
                .map(|(c, cell)| format!("\"{c}\": {}", render(cell, ff, true)))
                .collect();
            out.push_str("  {");
            out.push_str(&fields.join(", "));
            out.push('}');
            if i + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out
    }

    pub fn render(&self, format: Format, ff: FloatFormat) -> String {
        match format {
            Format::Csv => self.to_csv(ff),
            Format::Json => self.to_json(ff),
        }
    }
}

fn plain(cell: &Cell) -> String {
    match cell {
        Cell::Str(s) => s.clone(),
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => v.to_string(),
    }
}

fn render(cell: &Cell, ff: FloatFormat, json: bool) -> String {
    match cell {
        Cell::Str(s) if json => serde_json::to_string(s).expect("string serialises"),
        Cell::Str(s) => s.clone(),
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => ff.format(*v),
    }
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trips() {
        for v in [0.1, 1.0 / 3.0, 0.01, 1e-20, 2.5e-7, 123456.789, -0.0566, 1e17] {
            assert_eq!(shortest(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(shortest(0.01), "0.01");
        assert_eq!(shortest(1e-20), "1e-20");
        assert_eq!(shortest(3.0), "3");
    }

    #[test]
    fn float_format_parsing() {
        assert_eq!("shortest".parse::<FloatFormat>().unwrap(), FloatFormat::Shortest);
        assert_eq!("fixed:4".parse::<FloatFormat>().unwrap(), FloatFormat::Fixed(4));
        assert!("fixed:x".parse::<FloatFormat>().is_err());
        assert_eq!(FloatFormat::Fixed(3).format(0.12345), "0.123");
    }

    #[test]
    fn table_rendering_and_finiteness() {
        let mut t = Table::new(&["name", "k", "v"]);
        t.push(vec!["a".into(), 3u64.into(), 0.5.into()]);
        assert_eq!(t.to_csv(FloatFormat::Shortest), "name,k,v\na,3,0.5\n");
        assert_eq!(t.to_json(FloatFormat::Shortest), "[\n  {\"name\": \"a\", \"k\": 3, \"v\": 0.5}\n]\n");
        assert!(t.check_finite("t").is_ok());
        t.push(vec!["b".into(), 4u64.into(), f64::NAN.into()]);
        let err = t.check_finite("t").unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("row 2"));
    }
}

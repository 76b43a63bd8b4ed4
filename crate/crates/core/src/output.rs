//! Typed tables and their CSV / JSON encodings.
//!
//! CSV prints throughput columns with four decimals and every other real with
//! the shortest representation that parses back to the same `f64`. JSON keeps
//! full binary precision everywhere.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    /// Throughput in Mbps.
    Mbps,
    Real,
    Int,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: Kind,
}

impl Column {
    pub fn new(name: &str, kind: Kind) -> Self {
        Self {
            name: name.to_string(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}
impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}
impl From<u8> for Value {
    fn from(v: u8) -> Self {
        Value::Int(v as i64)
    }
}
impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}
impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}
impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Missing, Into::into)
    }
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Real(v) => Some(v),
            Value::Int(v) => Some(v as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Values of a numeric column, `None` for missing cells.
    pub fn column_f64(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    /// Appends the seed and configuration hash to every row.
    pub fn stamp(&mut self, seed: u64, config_hash: &str) {
        self.columns.push(Column::new("seed", Kind::Int));
        self.columns.push(Column::new("config_hash", Kind::Text));
        for r in &mut self.rows {
            r.push(Value::Int(seed as i64));
            r.push(Value::Text(config_hash.to_string()));
        }
    }

    /// The dataset as it reads back from CSV: throughput cells rounded to four decimals.
    pub fn quantized(&self) -> Dataset {
        let mut d = self.clone();
        for r in &mut d.rows {
            for (v, c) in r.iter_mut().zip(&self.columns) {
                if let (Kind::Mbps, Value::Real(x)) = (c.kind, &*v) {
                    *v = Value::Real(format!("{x:.4}").parse().expect("formatted float parses"));
                }
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid("format", format!("expected csv or json, got `{other}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

fn csv_cell(v: &Value, kind: Kind) -> String {
    match (v, kind) {
        (Value::Real(x), Kind::Mbps) => format!("{x:.4}"),
        (Value::Real(x), _) => format!("{x}"),
        (Value::Int(i), _) => i.to_string(),
        (Value::Text(s), _) => s.clone(),
        (Value::Missing, _) => String::new(),
    }
}

pub fn write_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(data.columns.iter().map(|c| c.name.as_str()))?;
    for row in &data.rows {
        w.write_record(row.iter().zip(&data.columns).map(|(v, c)| csv_cell(v, c.kind)))?;
    }
    w.flush()?;
    Ok(())
}

/// Parses CSV written by [`write_csv`] against the expected column schema.
pub fn read_csv<R: Read>(reader: R, columns: &[Column]) -> Result<Dataset> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let expected: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
    if header != expected {
        return Err(Error::Config(format!("CSV header {header:?} does not match {expected:?}")));
    }
    let mut data = Dataset::new(columns.to_vec());
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .zip(columns)
            .map(|(s, c)| {
                if s.is_empty() && c.kind != Kind::Text {
                    return Ok(Value::Missing);
                }
                match c.kind {
                    Kind::Mbps | Kind::Real => s
                        .parse()
                        .map(Value::Real)
                        .map_err(|_| Error::Config(format!("column `{}`: `{s}` is not a number", c.name))),
                    Kind::Int => s
                        .parse()
                        .map(Value::Int)
                        .map_err(|_| Error::Config(format!("column `{}`: `{s}` is not an integer", c.name))),
                    Kind::Text => Ok(Value::Text(s.to_string())),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        data.push(row);
    }
    Ok(data)
}

/// One JSON object per row, in column order, with full-precision numbers.
pub fn write_json<W: Write>(data: &Dataset, mut writer: W) -> Result<()> {
    let rows: Vec<Json> = data
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (v, c) in row.iter().zip(&data.columns) {
                let j = match v {
                    Value::Real(x) => serde_json::Number::from_f64(*x).map_or(Json::Null, Json::Number),
                    Value::Int(i) => Json::from(*i),
                    Value::Text(s) => Json::from(s.as_str()),
                    Value::Missing => Json::Null,
                };
                m.insert(c.name.clone(), j);
            }
            Json::Object(m)
        })
        .collect();
    serde_json::to_writer_pretty(&mut writer, &rows)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn write_dataset<W: Write>(data: &Dataset, format: Format, writer: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(data, writer),
        Format::Json => write_json(data, writer),
    }
}

pub fn to_string(data: &Dataset, format: Format) -> Result<String> {
    let mut buf = Vec::new();
    write_dataset(data, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("writers emit UTF-8"))
}

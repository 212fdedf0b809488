//! Flat output records, their CSV and JSON encodings, and a reader for the
//! CSV files this tool writes.

use std::io::{Read, Write};

use serde_json::{Map, Number};

use crate::CliError;

/// Significant digits kept for every floating-point output.
pub const SIG_DIGITS: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

/// Rounds to [`SIG_DIGITS`] significant digits. Negative zero becomes zero.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest decimal text for the rounded value; exponent notation below
/// `1e-5` or from `1e15` in magnitude.
pub fn format_number(x: f64) -> String {
    let r = round_sig(x);
    if r != 0.0 && (r.abs() < 1e-5 || r.abs() >= 1e15) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

impl Value {
    pub fn render(&self) -> String {
        match self {
            Value::Num(x) => format_number(*x),
            Value::Int(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Num(x) => Number::from_f64(round_sig(*x))
                .map(serde_json::Value::Number)
                .unwrap_or_else(|| serde_json::Value::String(x.to_string())),
            Value::Int(n) => serde_json::Value::from(*n),
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Text(s) => serde_json::Value::String(s.clone()),
        }
    }
}

/// Ordered key/value pairs making up one output row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputRecord {
    fields: Vec<(&'static str, Value)>,
}

impl OutputRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.fields.push((key, value.into()));
        self
    }

    pub fn keys(&self) -> Vec<&'static str> {
        self.fields.iter().map(|(k, _)| *k).collect()
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn fields(&self) -> &[(&'static str, Value)] {
        &self.fields
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

/// Header row plus one line per record, LF endings.
pub fn write_csv<W: Write>(records: &[OutputRecord], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let Some(first) = records.first() else {
        return Ok(());
    };
    let header = first.keys();
    w.write_record(&header).map_err(io_err)?;
    for r in records {
        if r.keys() != header {
            return Err(CliError::Internal("records with differing columns".into()));
        }
        w.write_record(r.fields().iter().map(|(_, v)| v.render())).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// An array of flat objects.
pub fn write_json<W: Write>(records: &[OutputRecord], mut out: W) -> Result<(), CliError> {
    let array: Vec<serde_json::Value> = records
        .iter()
        .map(|r| {
            let map: Map<String, serde_json::Value> =
                r.fields().iter().map(|(k, v)| (k.to_string(), v.to_json())).collect();
            serde_json::Value::Object(map)
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &array).map_err(io_err)?;
    out.write_all(b"\n").map_err(io_err)
}

pub fn write_records<W: Write>(records: &[OutputRecord], format: Format, out: W) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(records, out),
        Format::Json => write_json(records, out),
    }
}

/// A parsed CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read<R: Read>(input: R) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers().map_err(io_err)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()
            .map_err(io_err)?;
        Ok(Self { headers, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn text(&self, row: usize, name: &str) -> Option<&str> {
        Some(self.rows.get(row)?.get(self.column_index(name)?)?.as_str())
    }

    /// The cell as a number, `None` for missing or non-numeric cells.
    pub fn number(&self, row: usize, name: &str) -> Option<f64> {
        self.text(row, name)?.parse().ok()
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

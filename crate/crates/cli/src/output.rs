//! JSON Lines / CSV record writer. Records are flat-ish JSON objects; in CSV,
//! nested values are written as compact JSON inside the cell.

use std::io::{self, Write};

use clap::ValueEnum;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub struct Emitter<W: Write> {
    format: Format,
    out: W,
    header: Option<Vec<String>>,
}

impl<W: Write> Emitter<W> {
    pub fn new(format: Format, out: W) -> Self {
        Emitter { format, out, header: None }
    }

    pub fn emit(&mut self, record: &Map<String, Value>) -> io::Result<()> {
        match self.format {
            Format::Json => {
                serde_json::to_writer(&mut self.out, record)?;
                self.out.write_all(b"\n")
            }
            Format::Csv => {
                let keys: Vec<String> = record.keys().cloned().collect();
                let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
                if self.header.as_ref() != Some(&keys) {
                    w.write_record(&keys)?;
                    self.header = Some(keys);
                }
                w.write_record(record.values().map(cell))?;
                let bytes = w.into_inner().map_err(|e| e.into_error())?;
                self.out.write_all(&bytes)
            }
        }
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

/// Integers that fit in `i64` become JSON numbers, larger ones decimal strings.
pub fn int(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(n.to_string()),
    }
}

/// Non-finite floats have no JSON form; they become `null`.
pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

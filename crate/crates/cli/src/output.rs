//! Rendering of result records as plain text, CSV or JSON.

use std::io::Write;

use serde_json::{Map, Value};
use wprec::arith::{format_rational, to_decimal};
use wprec::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Plain,
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub enum Cell {
    Int(i64),
    Text(String),
    List(Vec<u32>),
    Bool(bool),
    Value(Rational),
    Missing,
}

impl Cell {
    fn text(&self, decimal: Option<usize>) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::List(v) => v.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
            Cell::Bool(b) => b.to_string(),
            Cell::Value(r) => match decimal {
                Some(d) => format!("{} ~ {}", format_rational(r), to_decimal(r, d)),
                None => format_rational(r),
            },
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::List(v) => Value::from(v.clone()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Value(r) => Value::from(format_rational(r)),
            Cell::Missing => Value::Null,
        }
    }
}

/// Named fields in output order.
#[derive(Clone, Debug, Default)]
pub struct Record {
    pub fields: Vec<(&'static str, Cell)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &'static str, cell: Cell) -> Self {
        self.fields.push((name, cell));
        self
    }

    fn to_json(&self, decimal: Option<usize>) -> Value {
        let mut map = Map::new();
        for (name, cell) in &self.fields {
            map.insert((*name).to_string(), cell.json());
            if let (Cell::Value(r), Some(d)) = (cell, decimal) {
                map.insert(format!("{name}_decimal"), Value::from(to_decimal(r, d)));
            }
        }
        Value::Object(map)
    }
}

pub struct Printer {
    pub format: Format,
    pub decimal: Option<usize>,
}

impl Printer {
    /// A single result. Plain output shows only the `value` field.
    pub fn single(&self, out: &mut dyn Write, record: &Record) -> std::io::Result<()> {
        match self.format {
            Format::Json => writeln!(out, "{}", self.json_text(&record.to_json(self.decimal))),
            Format::Csv => self.csv(out, std::slice::from_ref(record)),
            Format::Plain => {
                let value = record
                    .fields
                    .iter()
                    .find(|(name, _)| *name == "value")
                    .map(|(_, cell)| cell.text(self.decimal))
                    .unwrap_or_default();
                writeln!(out, "{value}")
            }
        }
    }

    /// A table. Plain output is one `a, b, ...` line per record.
    pub fn table(&self, out: &mut dyn Write, records: &[Record]) -> std::io::Result<()> {
        match self.format {
            Format::Json => {
                let rows: Vec<Value> = records.iter().map(|r| r.to_json(self.decimal)).collect();
                writeln!(out, "{}", self.json_text(&Value::Array(rows)))
            }
            Format::Csv => self.csv(out, records),
            Format::Plain => {
                for r in records {
                    let cells: Vec<String> = r.fields.iter().map(|(_, c)| c.text(self.decimal)).collect();
                    writeln!(out, "{}", cells.join(", "))?;
                }
                Ok(())
            }
        }
    }

    fn json_text(&self, value: &Value) -> String {
        serde_json::to_string(value).expect("plain JSON values serialize")
    }

    fn csv(&self, out: &mut dyn Write, records: &[Record]) -> std::io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        if let Some(first) = records.first() {
            let mut header: Vec<String> = Vec::new();
            for (name, cell) in &first.fields {
                header.push((*name).to_string());
                if matches!(cell, Cell::Value(_)) && self.decimal.is_some() {
                    header.push(format!("{name}_decimal"));
                }
            }
            writer.write_record(&header)?;
        }
        for r in records {
            let mut row = Vec::new();
            for (_, cell) in &r.fields {
                row.push(cell.text(None));
                if let (Cell::Value(v), Some(d)) = (cell, self.decimal) {
                    row.push(to_decimal(v, d));
                }
            }
            writer.write_record(&row)?;
        }
        writer.flush()
    }
}

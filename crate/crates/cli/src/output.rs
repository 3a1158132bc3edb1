//! CSV and JSON rendering of result tables.
//!
//! Floats are written in shortest round-trip form, so a value read back
//! parses to the identical `f64`. Complex quantities are split into `_re`
//! and `_im` columns. Metadata becomes `# key=value` lines ahead of the CSV
//! header, or top-level fields in JSON.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use crate::config::{Format, SCHEMA_VERSION};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(_) | Cell::Empty => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Meta {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Floats(Vec<f64>),
}

impl Meta {
    fn to_csv(&self) -> String {
        match self {
            Meta::Float(v) => format!("{v:?}"),
            Meta::Int(v) => v.to_string(),
            Meta::Bool(v) => v.to_string(),
            Meta::Text(s) => s.clone(),
            Meta::Floats(vs) => vs
                .iter()
                .map(|v| format!("{v:?}"))
                .collect::<Vec<_>>()
                .join(" "),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Meta::Float(v) => json!(v),
            Meta::Int(v) => json!(v),
            Meta::Bool(v) => json!(v),
            Meta::Text(s) => json!(s),
            Meta::Floats(vs) => json!(vs),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    pub meta: Vec<(String, Meta)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_meta(&mut self, key: &str, value: Meta) {
        self.meta.push((key.to_string(), value));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn meta(&self, key: &str) -> Option<&Meta> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Cell at `row`, `column`, by column name.
    pub fn get(&self, row: usize, column: &str) -> Option<&Cell> {
        self.column(column).and_then(|c| self.rows.get(row).map(|r| &r[c]))
    }

    fn header(&self, timestamp: bool) -> Vec<(String, Meta)> {
        let mut header = vec![
            ("schema_version".to_string(), Meta::Int(SCHEMA_VERSION as i64)),
            ("command".to_string(), Meta::Text(self.command.clone())),
        ];
        if timestamp {
            let now = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs() as i64)
                .unwrap_or(0);
            header.push(("generated_at".to_string(), Meta::Int(now)));
        }
        header.extend(self.meta.iter().cloned());
        header
    }

    pub fn write_csv<W: Write>(&self, mut out: W, timestamp: bool) -> Result<(), CliError> {
        let io = |source| CliError::Io {
            context: "writing CSV".into(),
            source,
        };
        for (key, value) in self.header(timestamp) {
            writeln!(out, "# {key}={}", value.to_csv()).map_err(io)?;
        }
        let mut writer = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| CliError::Io {
            context: "writing CSV".into(),
            source: e.into(),
        };
        writer.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            writer
                .write_record(row.iter().map(Cell::to_csv))
                .map_err(csv_err)?;
        }
        writer.flush().map_err(io)?;
        Ok(())
    }

    pub fn to_json(&self, timestamp: bool) -> Value {
        let mut doc = Map::new();
        for (key, value) in self.header(timestamp) {
            doc.insert(key, value.to_json());
        }
        doc.insert("columns".into(), json!(self.columns));
        let rows = self
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    self.columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::to_json))
                        .collect(),
                )
            })
            .collect();
        doc.insert("rows".into(), Value::Array(rows));
        Value::Object(doc)
    }

    pub fn write<W: Write>(&self, mut out: W, format: Format, timestamp: bool) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(out, timestamp),
            Format::Json => {
                let text = serde_json::to_string_pretty(&self.to_json(timestamp))
                    .expect("JSON values serialize");
                writeln!(out, "{text}").map_err(|source| CliError::Io {
                    context: "writing JSON".into(),
                    source,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", &["k", "x_re", "x_im"]);
        t.push_meta("normalizer", Meta::Float(std::f64::consts::SQRT_2));
        t.push_row(vec!["a".into(), 0.1.into(), Cell::Empty]);
        t.push_row(vec!["b".into(), (1.0 / 3.0).into(), (-2.0).into()]);
        t
    }

    #[test]
    fn csv_round_trips_full_precision() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# schema_version=1\n# command=demo\n"));
        assert!(!text.contains("generated_at"));
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows[1][1].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(&rows[0][2], "");
    }

    #[test]
    fn json_rows_are_keyed_by_column() {
        let doc = sample().to_json(true);
        assert!(doc.get("generated_at").is_some());
        assert_eq!(doc["rows"][1]["x_im"], json!(-2.0));
        assert_eq!(doc["rows"][0]["x_im"], Value::Null);
        assert_eq!(doc["normalizer"], json!(std::f64::consts::SQRT_2));
    }
}

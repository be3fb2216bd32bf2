//! Report envelopes: JSON objects or CSV tables, both tagged with the schema
//! version and the full run configuration.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::Format;

/// Rows of a CSV table, already rendered as strings.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// `path,value` rows for every scalar leaf of `v`.
    pub fn flatten(v: &Value) -> Self {
        let mut t = Table::new(&["key", "value"]);
        flatten_into(&mut t, String::new(), v);
        t
    }
}

fn flatten_into(t: &mut Table, prefix: String, v: &Value) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten_into(t, join(k), x);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in xs.iter().enumerate() {
                flatten_into(t, join(&i.to_string()), x);
            }
        }
        other => t.push(vec![prefix, scalar(other)]),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Formats a float so that it round-trips.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub struct Report {
    pub command: String,
    pub result: Value,
    /// Preferred CSV rendering; the flattened result is used when absent.
    pub table: Option<Table>,
}

impl Report {
    pub fn render(&self, format: Format, config: &Value) -> String {
        match format {
            Format::Json => {
                let envelope = serde_json::json!({
                    "schema_version": cdimlab::SCHEMA_VERSION,
                    "command": self.command,
                    "config": config,
                    "result": self.result,
                });
                let mut s = serde_json::to_string_pretty(&envelope).expect("reports are valid JSON");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = String::new();
                let _ = writeln!(s, "# schema_version: {}", cdimlab::SCHEMA_VERSION);
                let _ = writeln!(s, "# command: {}", self.command);
                let _ = writeln!(s, "# config: {config}");
                let flat;
                let table = match &self.table {
                    Some(t) => t,
                    None => {
                        flat = Table::flatten(&self.result);
                        &flat
                    }
                };
                let line = |cells: &[String]| cells.iter().map(|c| quote(c)).collect::<Vec<_>>().join(",");
                let _ = writeln!(s, "{}", line(&table.header));
                for row in &table.rows {
                    let _ = writeln!(s, "{}", line(row));
                }
                s
            }
        }
    }
}

/// Writes `text` to `out`, or to stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

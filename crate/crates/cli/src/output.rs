//! JSON and CSV rendering of command results.

use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use sqfree_core::family::ErrorRecord;
use sqfree_core::VERSION;

/// Version of the JSON report layout.
pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub enum Payload {
    /// A table, one object per row, columns in field order.
    Rows(Vec<Value>),
    /// A single report.
    Record(Value),
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

/// Flattens nested objects into dotted column names.
fn flatten(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn write_csv(rows: &[Map<String, Value>]) -> Result<String, String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    if let Some(first) = rows.first() {
        w.write_record(first.keys()).map_err(|e| e.to_string())?;
    }
    for row in rows {
        w.write_record(row.values().map(csv_cell)).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

pub fn render(command: &str, payload: Payload, format: Format, elapsed_ms: Option<f64>) -> Result<String, String> {
    match format {
        Format::Json => {
            let mut doc = json!({
                "schema": SCHEMA,
                "version": VERSION,
                "command": command,
            });
            match payload {
                Payload::Rows(rows) => doc["rows"] = Value::Array(rows),
                Payload::Record(r) => doc["result"] = r,
            }
            doc["elapsed_ms"] = json!(elapsed_ms);
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let records = match payload {
                Payload::Rows(rows) => rows,
                Payload::Record(r) => vec![r],
            };
            let rows: Vec<Map<String, Value>> = records
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    flatten("", r, &mut m);
                    m.insert("elapsed_ms".into(), json!(elapsed_ms));
                    m
                })
                .collect();
            write_csv(&rows)
        }
    }
}

/// Per-member experiment rows.
pub fn write_records(path: &Path, records: &[ErrorRecord]) -> Result<(), String> {
    let rows: Vec<Map<String, Value>> = records
        .iter()
        .map(|r| match serde_json::to_value(r) {
            Ok(Value::Object(m)) => m,
            _ => Map::new(),
        })
        .collect();
    let mut text = write_csv(&rows)?;
    if rows.is_empty() {
        text = "index,coefficients,status,count,density,error\n".into();
    }
    std::fs::write(path, text).map_err(|e| e.to_string())
}

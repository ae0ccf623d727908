//! JSON and CSV rendering. JSON floats carry 17 significant digits so every
//! double round-trips; CSV floats carry 12.

use std::io::{self, Write};

use anyhow::Context;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};

/// Result of one command, before formatting.
pub enum Body {
    /// A single nested record; CSV flattens it to `field,value` rows.
    Record(Value),
    /// Rows under a fixed header plus summary fields that only JSON carries.
    Table {
        columns: Vec<String>,
        rows: Vec<Vec<Value>>,
        summary: Map<String, Value>,
    },
}

pub struct Output<'a> {
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub body: Body,
}

impl Output<'_> {
    pub fn render(&self, format: Format) -> anyhow::Result<Vec<u8>> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    /// Writes to the configured path, or stdout when none is set.
    pub fn emit(&self) -> anyhow::Result<()> {
        let bytes = self.render(self.config.format)?;
        match &self.config.out {
            Some(path) => std::fs::write(path, &bytes)
                .with_context(|| format!("cannot write {}", path.display())),
            None => io::stdout()
                .write_all(&bytes)
                .context("cannot write to stdout"),
        }
    }

    fn to_json(&self) -> anyhow::Result<Vec<u8>> {
        let mut top = Map::new();
        top.insert("command".into(), self.command.into());
        top.insert("config".into(), serde_json::to_value(self.config)?);
        match &self.body {
            Body::Record(Value::Object(fields)) => top.extend(fields.clone()),
            Body::Record(other) => {
                top.insert("result".into(), other.clone());
            }
            Body::Table {
                columns,
                rows,
                summary,
            } => {
                top.extend(summary.clone());
                let rows = rows
                    .iter()
                    .map(|r| {
                        Value::Object(columns.iter().cloned().zip(r.iter().cloned()).collect())
                    })
                    .collect();
                top.insert("rows".into(), Value::Array(rows));
            }
        }
        let mut out = to_json_bytes(&Value::Object(top))?;
        out.push(b'\n');
        Ok(out)
    }

    fn to_csv(&self) -> anyhow::Result<Vec<u8>> {
        let mut out = Vec::new();
        let echo = serde_json::to_string(self.config)?;
        writeln!(out, "# {} config={echo}", self.command)?;
        let (columns, rows) = match &self.body {
            Body::Record(value) => {
                let mut rows = Vec::new();
                flatten("", value, &mut rows);
                let rows = rows
                    .into_iter()
                    .map(|(k, v)| vec![Value::String(k), v])
                    .collect();
                (vec!["field".to_string(), "value".to_string()], rows)
            }
            Body::Table { columns, rows, .. } => (columns.clone(), rows.clone()),
        };
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&columns)?;
        for row in &rows {
            w.write_record(row.iter().map(csv_cell))?;
        }
        w.flush()?;
        drop(w);
        Ok(out)
    }
}

/// Pretty JSON with every float written as `{:.16e}`.
pub fn to_json_bytes<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision::default());
    value.serialize(&mut ser)?;
    Ok(out)
}

pub fn json_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format!("{:.11e}", n.as_f64().unwrap_or(f64::NAN)),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, Value)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        leaf => out.push((prefix.to_string(), leaf.clone())),
    }
}

#[derive(Default)]
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(json_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip_with_seventeen_digits() {
        let x = 0.1 + 0.2;
        let bytes = to_json_bytes(&json!({ "x": x, "n": 3, "nan": f64::NAN })).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("3.0000000000000004e-1"), "{text}");
        assert!(text.contains("\"n\": 3"));
        assert!(text.contains("\"nan\": null"));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64(), Some(x));
    }

    #[test]
    fn records_flatten_for_csv() {
        let mut rows = Vec::new();
        flatten("", &json!({"a": {"b": [1.5, 2]}, "c": null}), &mut rows);
        let keys: Vec<_> = rows.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["a.b.0", "a.b.1", "c"]);
        assert_eq!(csv_cell(&rows[0].1), "1.50000000000e0");
        assert_eq!(csv_cell(&rows[2].1), "");
    }
}

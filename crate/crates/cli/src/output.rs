//! CSV and JSON writers. Floats are printed with 17 significant digits so
//! that values round-trip exactly.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if v == 0.0 {
        // drop the sign of negative zero
        "0.0000000000000000e0".into()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(format_float(*v)),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// What a subcommand produced.
pub struct Report {
    pub command: &'static str,
    pub table: Table,
    /// Machine-readable summary for the sidecar.
    pub summary: Value,
    /// One-line human summary.
    pub line: String,
    /// Extra `#` metadata lines (after the config line).
    pub meta: Vec<(String, Value)>,
}

fn write_csv(out: &mut dyn Write, report: &Report, config: &RunConfig) -> anyhow::Result<()> {
    writeln!(out, "# jpa {}", report.command)?;
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    for (key, value) in &report.meta {
        writeln!(out, "# {key}: {}", serde_json::to_string(value)?)?;
    }
    writeln!(out, "{}", report.table.columns.join(","))?;
    for row in &report.table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

fn document(report: &Report, config: &RunConfig, with_rows: bool) -> Value {
    let mut doc = json!({
        "command": report.command,
        "config": config,
        "summary": report.summary,
    });
    for (key, value) in &report.meta {
        doc[key.as_str()] = value.clone();
    }
    if with_rows {
        let rows: Vec<Value> = report
            .table
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, Value> = report
                    .table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        doc["rows"] = Value::Array(rows);
    }
    doc
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".summary.json");
    path.with_file_name(name)
}

/// Writes the report to `config.output` (or `stdout`) and, for CSV files, a
/// sidecar summary next to it. Returns the sidecar path if one was written.
pub fn emit(
    report: &Report,
    config: &RunConfig,
    stdout: &mut dyn Write,
) -> anyhow::Result<Option<PathBuf>> {
    let format = config.format.unwrap_or_default();
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&mut buf, report, config)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &document(report, config, true))?;
            buf.push(b'\n');
        }
    }
    match &config.output {
        None => {
            stdout.write_all(&buf)?;
            Ok(None)
        }
        Some(path) => {
            std::fs::write(path, &buf).with_context(|| format!("writing {}", path.display()))?;
            if format == Format::Csv {
                let side = sidecar_path(path);
                let mut text = serde_json::to_string_pretty(&document(report, config, false))?;
                text.push('\n');
                std::fs::write(&side, text)
                    .with_context(|| format!("writing {}", side.display()))?;
                Ok(Some(side))
            } else {
                Ok(None)
            }
        }
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [
            0.1,
            1.0 / 3.0,
            1.00297,
            -8.808_426_100_473_34e-4,
            6.02e23,
            5e-324,
        ] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let mut table = Table::new(&["a", "b", "c"]);
        table.push(vec![0.5.into(), 3usize.into(), "x,y".into()]);
        let report = Report {
            command: "test",
            table,
            summary: json!({}),
            line: String::new(),
            meta: vec![("derived".into(), json!({"k": 1}))],
        };
        let mut out = Vec::new();
        emit(&report, &RunConfig::default(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# jpa test");
        assert_eq!(lines[1], "# config: {}");
        assert_eq!(lines[2], "# derived: {\"k\":1}");
        assert_eq!(lines[3], "a,b,c");
        assert_eq!(lines[4], "5.0000000000000000e-1,3,\"x,y\"");
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            sidecar_path(Path::new("/tmp/gain.csv")),
            PathBuf::from("/tmp/gain.csv.summary.json")
        );
    }
}

//! Run reports and their JSON and CSV renderings.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// One pass/fail comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value < threshold`.
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value < threshold,
        }
    }
}

/// A rectangular table written as CSV in place of the generic report rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    /// SHA-256 of the input file, or of the canonical argument string when
    /// there is no file.
    pub input_digest: String,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outputs: Map<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl RunReport {
    pub fn new(command: &'static str, input_digest: String, tolerance: f64) -> Self {
        Self {
            command,
            input_digest,
            tolerance,
            seed: None,
            outputs: Map::new(),
            checks: Vec::new(),
            passed: true,
            table: None,
        }
    }

    pub fn output(&mut self, key: &str, value: impl Into<Value>) {
        self.outputs.insert(key.into(), value.into());
    }

    pub fn check(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Floats for CSV: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A JSON number, or `null` when not finite.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) if n.is_f64() => fmt_f64(n.as_f64().expect("f64 number")),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Array(_) | Value::Object(_) => unreachable!("flattened"),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        _ => out.push((prefix.to_string(), scalar_text(v))),
    }
}

pub fn write_report<W: Write>(report: &RunReport, format: Format, out: W) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(report, out),
        Format::Csv => match &report.table {
            Some(t) => write_table(t, out),
            None => write_rows(report, out),
        },
    }
}

fn write_json<W: Write>(report: &RunReport, mut out: W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, report).map_err(|e| CliError::Output(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Output(e.to_string()))
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Output(e.to_string())
}

fn write_table<W: Write>(t: &Table, out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(&t.header).map_err(csv_error)?;
    for row in &t.rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}

/// Generic layout: `section,name,value,threshold,passed`.
fn write_rows<W: Write>(report: &RunReport, out: W) -> Result<(), CliError> {
    let mut rows: Vec<Vec<String>> = vec![
        vec!["meta".into(), "command".into(), report.command.into()],
        vec!["meta".into(), "input_digest".into(), report.input_digest.clone()],
        vec!["meta".into(), "tolerance".into(), fmt_f64(report.tolerance)],
    ];
    if let Some(seed) = report.seed {
        rows.push(vec!["meta".into(), "seed".into(), seed.to_string()]);
    }
    let mut flat = Vec::new();
    for (k, v) in &report.outputs {
        flatten(k, v, &mut flat);
    }
    rows.extend(flat.into_iter().map(|(k, v)| vec!["output".into(), k, v]));
    for c in &report.checks {
        rows.push(vec![
            "check".into(),
            c.name.clone(),
            fmt_f64(c.value),
            fmt_f64(c.threshold),
            c.passed.to_string(),
        ]);
    }
    rows.push(vec!["meta".into(), "passed".into(), report.passed.to_string()]);
    for r in &mut rows {
        r.resize(5, String::new());
    }
    write_table(
        &Table {
            header: vec!["section", "name", "value", "threshold", "passed"],
            rows,
        },
        out,
    )
}

//! Report assembly and the three output formats.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};
use sievekit::SieveError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

/// How a run ended, and so the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The report is complete but its hypotheses are not met.
    HypothesesFailed,
    /// The report is complete but records a failed check.
    CheckFailed,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::HypothesesFailed => 2,
            Status::CheckFailed => 1,
        }
    }
}

/// Rows for CSV and plain output. Columns are fixed per command.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn row<I: IntoIterator<Item = String>>(mut self, cells: I) -> Self {
        self.push(cells);
        self
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let cells: Vec<String> = cells.into_iter().collect();
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }
}

/// What a command hands back to the driver.
pub struct Outcome {
    pub result: Value,
    pub diagnostics: Value,
    pub table: Table,
    pub status: Status,
}

impl Outcome {
    pub fn new<T: Serialize>(result: &T, table: Table) -> anyhow::Result<Self> {
        Ok(Outcome {
            result: serde_json::to_value(result)?,
            diagnostics: json!({}),
            table,
            status: Status::Ok,
        })
    }

    pub fn with_diagnostics(mut self, d: Value) -> Self {
        self.diagnostics = d;
        self
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn failing_if(self, failed: bool, status: Status) -> Self {
        if failed {
            self.with_status(status)
        } else {
            self
        }
    }
}

#[derive(Serialize)]
pub struct Report<'a> {
    pub schema: u32,
    pub command: &'a str,
    pub params: Value,
    pub profile: String,
    pub result: &'a Value,
    pub diagnostics: &'a Value,
    pub elapsed_ms: f64,
}

pub fn emit(
    out: &mut impl Write,
    format: Format,
    report: &Report,
    table: &Table,
) -> anyhow::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(&table.header)?;
            for r in &table.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Format::Plain => {
            for r in &table.rows {
                let line: Vec<String> = table
                    .header
                    .iter()
                    .zip(r)
                    .map(|(h, v)| format!("{h}={v}"))
                    .collect();
                writeln!(out, "{}", line.join(" "))?;
            }
        }
    }
    Ok(())
}

/// The machine-readable error object printed on exit code 1.
pub fn error_object(command: Option<&str>, err: &anyhow::Error) -> Value {
    let detail = match err.downcast_ref::<SieveError>() {
        Some(SieveError::Capacity {
            what,
            requested,
            limit,
        }) => {
            json!({"kind": "capacity", "what": what, "requested": requested, "limit": limit})
        }
        Some(SieveError::Domain(m)) => json!({"kind": "domain", "message": m}),
        Some(SieveError::Degenerate(m)) => json!({"kind": "degenerate", "message": m}),
        Some(SieveError::Divisibility { witnesses }) => {
            json!({"kind": "divisibility", "witnesses": witnesses})
        }
        Some(SieveError::Budget {
            budget,
            completed_through,
            partial_sum,
        }) => json!({
            "kind": "budget",
            "budget": budget,
            "completed_through": completed_through,
            "partial_sum": partial_sum,
        }),
        Some(SieveError::Parse(m)) => json!({"kind": "parse", "message": m}),
        None => match err.downcast_ref::<clap::Error>() {
            Some(e) => {
                let text = e.to_string();
                let first = text
                    .lines()
                    .next()
                    .unwrap_or("")
                    .trim_start_matches("error: ")
                    .to_string();
                json!({"kind": "usage", "message": first, "detail": text.trim_end()})
            }
            None => json!({"kind": "io", "message": format!("{err:#}")}),
        },
    };
    let mut obj = json!({"schema": SCHEMA, "error": detail});
    obj["error"]["message"] = obj["error"]
        .get("message")
        .cloned()
        .unwrap_or_else(|| Value::String(err.to_string()));
    if let Some(c) = command {
        obj["command"] = Value::String(c.to_string());
    }
    obj
}

pub fn cell<T: ToString>(v: T) -> String {
    v.to_string()
}

/// Shortest round-trip form, with an exponent for very small or large
/// values. `NaN` and infinities print as empty cells, like JSON `null`.
pub fn fcell(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        String::new()
    }
}

pub fn set_cell(s: &sievekit::IntegerSet) -> String {
    s.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

//! Output formats: CSV with a `#`-prefixed JSON metadata line, plain JSON,
//! and a JSON record form of boundary codes.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use quadbound_core::coding::{validate_code, BoundaryCode, WellLabeledTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Formats a float with a decimal point and no locale dependence.
/// Non-finite values are written as `nan`, `inf` or `-inf`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // shortest round-trip form, scientific only for extreme magnitudes
    format!("{:?}", x)
}

/// A rectangular result with metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(meta: Value, columns: &[&str]) -> Self {
        Table { meta, columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write + ?Sized>(&self, w: &mut W, format: Format) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(w, "# {}", self.meta)?;
                let mut cw = csv::Writer::from_writer(w);
                cw.write_record(&self.columns)?;
                for r in &self.rows {
                    cw.write_record(r)?;
                }
                cw.flush()
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().map(|c| cell_json(c))).collect()))
                    .collect();
                serde_json::to_writer_pretty(&mut *w, &json!({ "meta": self.meta, "rows": rows }))?;
                writeln!(w)
            }
        }
    }
}

// numbers stay numbers in JSON, except big integers and rationals, which are
// kept as exact strings
fn cell_json(c: &str) -> Value {
    if let Ok(i) = c.parse::<i64>() {
        return json!(i);
    }
    if c.trim_start_matches('-').bytes().all(|b| b.is_ascii_digit()) {
        return json!(c);
    }
    match c.parse::<f64>() {
        Ok(x) if x.is_finite() && !c.contains('/') => json!(x),
        _ => json!(c),
    }
}

/// Parsed CSV output: metadata and rows. Used by tests and by consumers
/// that re-read figure data.
pub fn read_csv(text: &str) -> Result<(Value, Vec<String>, Vec<Vec<String>>), String> {
    let mut lines = text.splitn(2, '\n');
    let first = lines.next().ok_or("empty output")?;
    let meta = first.strip_prefix("# ").ok_or("missing '# ' metadata line")?;
    let meta: Value = serde_json::from_str(meta).map_err(|e| e.to_string())?;
    let mut rd = csv::Reader::from_reader(lines.next().unwrap_or("").as_bytes());
    let header = rd.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for r in rd.records() {
        rows.push(r.map_err(|e| e.to_string())?.iter().map(String::from).collect());
    }
    Ok((meta, header, rows))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub labels: Vec<i64>,
    pub degrees: Vec<u32>,
}

/// JSON form of a boundary code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeRecord {
    pub base: usize,
    pub steps: Vec<i8>,
    pub trees: Vec<TreeRecord>,
}

impl From<&BoundaryCode> for CodeRecord {
    fn from(c: &BoundaryCode) -> Self {
        CodeRecord {
            base: c.base,
            steps: c.steps.clone(),
            trees: c
                .trees
                .iter()
                .map(|t| TreeRecord { labels: t.labels().to_vec(), degrees: t.degrees().to_vec() })
                .collect(),
        }
    }
}

impl TryFrom<CodeRecord> for BoundaryCode {
    type Error = String;

    fn try_from(r: CodeRecord) -> Result<Self, String> {
        let trees = r
            .trees
            .into_iter()
            .map(|t| WellLabeledTree::from_preorder(t.labels, t.degrees).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        let code = BoundaryCode { base: r.base, steps: r.steps, trees };
        let v = validate_code(&code);
        if let Some(first) = v.first() {
            return Err(first.to_string());
        }
        Ok(code)
    }
}

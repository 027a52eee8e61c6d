//! Report structures and their json / csv / human renderings.
//!
//! Every report is a flat JSON object, optionally with one array of row
//! objects (`coefficients`, `representatives`, `properties`). JSON output is
//! a single compact line. CSV output has a header line and one line per row
//! when the report has rows, else one line with the scalar fields. Human
//! output is `key: value` lines followed by an aligned table of the rows.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Human,
}

/// Keys that hold the row list of a report, if present.
const ROW_KEYS: [&str; 3] = ["coefficients", "representatives", "properties"];

pub fn render<T: Serialize>(report: &T, format: Format) -> Result<String> {
    let value = serde_json::to_value(report)?;
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string(&value)?;
            s.push('\n');
            s
        }
        Format::Csv => render_csv(&value),
        Format::Human => render_human(&value),
    })
}

type Row = Map<String, Value>;

fn split(value: &Value) -> (Row, Option<Vec<Row>>) {
    let mut scalars = Map::new();
    let mut rows = None;
    if let Value::Object(obj) = value {
        for (k, v) in obj {
            match v {
                Value::Array(items) if ROW_KEYS.contains(&k.as_str()) => {
                    rows = Some(items.iter().filter_map(|r| r.as_object().cloned()).collect());
                }
                _ => {
                    scalars.insert(k.clone(), v.clone());
                }
            }
        }
    }
    (scalars, rows)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_csv(value: &Value) -> String {
    let (scalars, rows) = split(value);
    let mut w = csv::Writer::from_writer(Vec::new());
    match rows {
        Some(rows) => {
            let header: Vec<String> = rows.first().map(|r| r.keys().cloned().collect()).unwrap_or_default();
            w.write_record(&header).expect("in-memory write");
            for r in &rows {
                w.write_record(header.iter().map(|k| r.get(k).map(cell).unwrap_or_default())).expect("in-memory write");
            }
        }
        None => {
            w.write_record(scalars.keys()).expect("in-memory write");
            w.write_record(scalars.values().map(cell)).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn render_human(value: &Value) -> String {
    let (scalars, rows) = split(value);
    let width = scalars.keys().map(|k| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in &scalars {
        out.push_str(&format!("{k:<width$}  {}\n", cell(v)));
    }
    if let Some(rows) = rows.filter(|r| !r.is_empty()) {
        let header: Vec<String> = rows[0].keys().cloned().collect();
        let cells: Vec<Vec<String>> =
            rows.iter().map(|r| header.iter().map(|k| r.get(k).map(cell).unwrap_or_default()).collect()).collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|i| cells.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0))
            .collect();
        out.push('\n');
        let line = |fields: &[String]| {
            let mut s: String =
                fields.iter().zip(&widths).map(|(f, w)| format!("{f:<w$}")).collect::<Vec<_>>().join("  ");
            s.truncate(s.trim_end().len());
            s.push('\n');
            s
        };
        out.push_str(&line(&header));
        for r in &cells {
            out.push_str(&line(r));
        }
    }
    out
}

/// `{order, value, raw, mode, term_count | samples, stderr?, runtime_ms}`.
#[derive(Clone, Debug, Serialize)]
pub struct NormOut {
    pub n: usize,
    pub d: u32,
    pub order: u32,
    pub value: f64,
    pub raw: f64,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term_count: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub runtime_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct Coefficient {
    pub label: String,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FourierOut {
    pub n: usize,
    pub d: u32,
    pub parseval: f64,
    /// `Σ |Û(a)|⁴ = ‖U‖_{P²}⁴`.
    pub l4_fourth: f64,
    pub support: usize,
    pub coefficients: Vec<Coefficient>,
    pub runtime_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipOut {
    pub n: usize,
    pub d: u32,
    pub k: u32,
    pub decision: &'static str,
    pub tolerance: f64,
    pub defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub runtime_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct FidelityOut {
    pub n: usize,
    pub d: u32,
    pub k: u32,
    pub value: f64,
    pub argmax: String,
    pub argmax_index: usize,
    /// `exact`, or `lower-bound` when the level set is a candidate family.
    pub bound: &'static str,
    pub set_size: usize,
    pub construction: &'static str,
    pub runtime_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct Representative {
    pub index: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnumerateOut {
    pub n: usize,
    pub d: u32,
    pub k: u32,
    pub count: usize,
    pub completeness: &'static str,
    pub construction: &'static str,
    pub cached: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub representatives: Option<Vec<Representative>>,
    pub runtime_ms: u128,
}

/// `{n, d, k, epsilon, repetitions, E, decision, queries_U, queries_Uadj, seed, runtime_ms}`.
#[derive(Clone, Debug, Serialize)]
pub struct TesterOut {
    pub n: usize,
    pub d: u32,
    pub k: u32,
    pub epsilon: f64,
    pub repetitions: u64,
    #[serde(rename = "E")]
    pub estimate: f64,
    pub threshold: f64,
    /// The tester's output bit: 1 accepts, 0 rejects.
    pub decision: u8,
    #[serde(rename = "queries_U")]
    pub queries_u: u64,
    #[serde(rename = "queries_Uadj")]
    pub queries_u_adj: u64,
    pub swap: &'static str,
    pub seed: u64,
    pub runtime_ms: u128,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Flat {
        a: u32,
        b: &'static str,
        c: Option<f64>,
    }

    #[derive(Serialize)]
    struct WithRows {
        total: u32,
        properties: Vec<Flat>,
    }

    #[test]
    fn formats() {
        let f = Flat { a: 1, b: "x,y", c: None };
        assert_eq!(render(&f, Format::Json).unwrap(), "{\"a\":1,\"b\":\"x,y\",\"c\":null}\n");
        assert_eq!(render(&f, Format::Csv).unwrap(), "a,b,c\n1,\"x,y\",\n");
        assert_eq!(render(&f, Format::Human).unwrap(), "a  1\nb  x,y\nc  \n");
        let r = WithRows {
            total: 2,
            properties: vec![Flat { a: 1, b: "p", c: Some(0.5) }, Flat { a: 22, b: "q", c: None }],
        };
        assert_eq!(render(&r, Format::Csv).unwrap(), "a,b,c\n1,p,0.5\n22,q,\n");
        assert_eq!(render(&r, Format::Human).unwrap(), "total  2\n\na   b  c\n1   p  0.5\n22  q\n");
    }
}

//! Record sets and their JSON / CSV serialization.
//!
//! Floats are written with 17 significant digits. Complex cells become a
//! `{"re", "im"}` object in JSON and a `name_re`, `name_im` column pair in CSV.

use std::io::Write;

use num_complex::Complex64;
use serde_json::Value as Json;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Complex(Complex64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<Complex64> for Value {
    fn from(v: Complex64) -> Self {
        Value::Complex(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row(pub Vec<(String, Value)>);

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Meta {
    pub version: String,
    pub parameters: Row,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordSet {
    pub meta: Meta,
    pub rows: Vec<Row>,
}

pub fn format_real(x: f64) -> String {
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

fn json_string(s: &str) -> String {
    Json::String(s.to_string()).to_string()
}

fn json_real(x: f64) -> String {
    if x.is_finite() {
        format_real(x)
    } else {
        json_string(&format_real(x))
    }
}

fn json_value(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Real(x) => json_real(*x),
        Value::Complex(z) => format!("{{\"re\": {}, \"im\": {}}}", json_real(z.re), json_real(z.im)),
        Value::Text(s) => json_string(s),
        Value::Bool(b) => b.to_string(),
    }
}

fn json_row(row: &Row) -> String {
    let fields: Vec<String> = row
        .0
        .iter()
        .map(|(k, v)| format!("{}: {}", json_string(k), json_value(v)))
        .collect();
    format!("{{{}}}", fields.join(", "))
}

fn csv_columns(rows: &[Row]) -> Vec<(String, bool)> {
    let mut cols: Vec<(String, bool)> = Vec::new();
    for row in rows {
        for (k, v) in &row.0 {
            if !cols.iter().any(|(c, _)| c == k) {
                cols.push((k.clone(), matches!(v, Value::Complex(_))));
            }
        }
    }
    cols
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Real(x) => format_real(*x),
        Value::Text(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Complex(_) => unreachable!("complex cells are split"),
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: "<output>".into(),
        source: e,
    }
}

/// Writes the record set. Empty record sets are rejected.
pub fn emit(set: &RecordSet, format: Format, sink: &mut dyn Write) -> Result<()> {
    if set.rows.is_empty() {
        return Err(CliError::Validation("record set has no rows".into()));
    }
    match format {
        Format::Json => {
            let mut out = String::from("{\n  \"meta\": {");
            out.push_str(&format!(
                "\"version\": {}, \"parameters\": {}, \"seed\": {}}},\n  \"rows\": [\n",
                json_string(&set.meta.version),
                json_row(&set.meta.parameters),
                set.meta.seed
            ));
            let rows: Vec<String> = set.rows.iter().map(|r| format!("    {}", json_row(r))).collect();
            out.push_str(&rows.join(",\n"));
            out.push_str("\n  ]\n}\n");
            sink.write_all(out.as_bytes()).map_err(io_err)
        }
        Format::Csv => {
            let cols = csv_columns(&set.rows);
            let mut w = csv::Writer::from_writer(sink);
            let mut header = Vec::new();
            for (name, complex) in &cols {
                if *complex {
                    header.push(format!("{name}_re"));
                    header.push(format!("{name}_im"));
                } else {
                    header.push(name.clone());
                }
            }
            w.write_record(&header).map_err(csv_err)?;
            for row in &set.rows {
                let mut rec = Vec::new();
                for (name, complex) in &cols {
                    match (row.get(name), complex) {
                        (Some(Value::Complex(z)), _) => {
                            rec.push(format_real(z.re));
                            rec.push(format_real(z.im));
                        }
                        (Some(v), false) => rec.push(csv_cell(v)),
                        (None, true) => rec.extend([String::new(), String::new()]),
                        (None, false) => rec.push(String::new()),
                        (Some(v), true) => {
                            rec.push(csv_cell(v));
                            rec.push(String::new());
                        }
                    }
                }
                w.write_record(&rec).map_err(csv_err)?;
            }
            w.flush().map_err(io_err)
        }
    }
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(io),
        other => CliError::Parse(format!("{other:?}")),
    }
}

fn parse_real(s: &str) -> Option<f64> {
    match s {
        "NaN" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

fn from_json(v: &Json) -> Result<Value> {
    Ok(match v {
        Json::Bool(b) => Value::Bool(*b),
        Json::Number(n) => match n.as_i64() {
            Some(i) => Value::Int(i),
            None => Value::Real(n.as_f64().ok_or_else(|| CliError::Parse(format!("number {n}")))?),
        },
        Json::String(s) => match s.as_str() {
            "NaN" | "inf" | "-inf" => Value::Real(parse_real(s).unwrap_or(f64::NAN)),
            _ => Value::Text(s.clone()),
        },
        Json::Object(o) if o.len() == 2 && o.contains_key("re") && o.contains_key("im") => {
            let part = |k: &str| match from_json(&o[k])? {
                Value::Real(x) => Ok(x),
                Value::Int(i) => Ok(i as f64),
                other => Err(CliError::Parse(format!("complex part {other:?}"))),
            };
            Value::Complex(Complex64::new(part("re")?, part("im")?))
        }
        other => return Err(CliError::Parse(format!("unexpected value {other}"))),
    })
}

fn row_from_json(v: &Json) -> Result<Row> {
    let obj = v
        .as_object()
        .ok_or_else(|| CliError::Parse("row is not an object".into()))?;
    let mut row = Row::new();
    for (k, v) in obj {
        row.0.push((k.clone(), from_json(v)?));
    }
    Ok(row)
}

fn cell_from_csv(s: &str) -> Value {
    if let Ok(i) = s.parse::<i64>() {
        return Value::Int(i);
    }
    if let Some(x) = parse_real(s) {
        return Value::Real(x);
    }
    match s {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::Text(s.to_string()),
    }
}

/// Reads rows back. JSON restores the meta block; CSV carries rows only, so
/// the caller supplies `meta`.
pub fn parse_rows(input: &str, format: Format) -> Result<Vec<Row>> {
    match format {
        Format::Json => Ok(parse(input)?.rows),
        Format::Csv => {
            let mut r = csv::Reader::from_reader(input.as_bytes());
            let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
            let mut rows = Vec::new();
            for rec in r.records() {
                let rec = rec.map_err(csv_err)?;
                let mut row = Row::new();
                let mut k = 0;
                while k < header.len() {
                    let name = &header[k];
                    let paired = name
                        .strip_suffix("_re")
                        .filter(|base| header.get(k + 1).map(|n| n == &format!("{base}_im")).unwrap_or(false));
                    match paired {
                        Some(base) => {
                            let (re, im) = (&rec[k], &rec[k + 1]);
                            if !re.is_empty() {
                                let re = parse_real(re).ok_or_else(|| CliError::Parse(re.to_string()))?;
                                let im = parse_real(im).ok_or_else(|| CliError::Parse(im.to_string()))?;
                                row.0.push((base.to_string(), Value::Complex(Complex64::new(re, im))));
                            }
                            k += 2;
                        }
                        None => {
                            if !rec[k].is_empty() {
                                row.0.push((name.clone(), cell_from_csv(&rec[k])));
                            }
                            k += 1;
                        }
                    }
                }
                rows.push(row);
            }
            Ok(rows)
        }
    }
}

/// Parses a JSON record set written by [`emit`].
pub fn parse(input: &str) -> Result<RecordSet> {
    let v: Json = serde_json::from_str(input).map_err(|e| CliError::Parse(e.to_string()))?;
    let meta = v.get("meta").ok_or_else(|| CliError::Parse("missing meta".into()))?;
    let version = meta
        .get("version")
        .and_then(Json::as_str)
        .ok_or_else(|| CliError::Parse("missing version".into()))?
        .to_string();
    let seed = meta
        .get("seed")
        .and_then(Json::as_u64)
        .ok_or_else(|| CliError::Parse("missing seed".into()))?;
    let parameters = row_from_json(
        meta.get("parameters")
            .ok_or_else(|| CliError::Parse("missing parameters".into()))?,
    )?;
    let rows = v
        .get("rows")
        .and_then(Json::as_array)
        .ok_or_else(|| CliError::Parse("missing rows".into()))?
        .iter()
        .map(row_from_json)
        .collect::<Result<Vec<_>>>()?;
    Ok(RecordSet {
        meta: Meta {
            version,
            parameters,
            seed,
        },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> RecordSet {
        RecordSet {
            meta: Meta {
                version: "0.1.0".into(),
                parameters: Row::new().with("theta", 0.3).with("dim", 64usize),
                seed: 7,
            },
            rows: vec![
                Row::new()
                    .with("n", 0usize)
                    .with("value", Complex64::new(1.0, 2.0))
                    .with("err", 0.1 + 0.2)
                    .with("method", "POSITION_CLOSED"),
                Row::new()
                    .with("n", 1usize)
                    .with("value", Complex64::new(-1.0 / 3.0, 1e-300))
                    .with("err", std::f64::consts::PI)
                    .with("method", "with, comma"),
            ],
        }
    }

    fn emit_string(set: &RecordSet, format: Format) -> String {
        let mut buf = Vec::new();
        emit(set, format, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_rows_are_rejected() {
        let mut set = fixture();
        set.rows.clear();
        let mut buf = Vec::new();
        assert!(matches!(emit(&set, Format::Json, &mut buf), Err(CliError::Validation(_))));
        assert!(matches!(emit(&set, Format::Csv, &mut buf), Err(CliError::Validation(_))));
    }

    #[test]
    fn complex_cells_split_into_re_and_im() {
        let set = fixture();
        let json = emit_string(&set, Format::Json);
        let v: Json = serde_json::from_str(&json).unwrap();
        assert_eq!(v["rows"][0]["value"]["re"].as_f64(), Some(1.0));
        assert_eq!(v["rows"][0]["value"]["im"].as_f64(), Some(2.0));
        let csv = emit_string(&set, Format::Csv);
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "n,value_re,value_im,err,method");
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_real(0.1 + 0.2), "3.0000000000000004e-1");
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn json_round_trip() {
        let set = fixture();
        let back = parse(&emit_string(&set, Format::Json)).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn csv_round_trip() {
        let set = fixture();
        let rows = parse_rows(&emit_string(&set, Format::Csv), Format::Csv).unwrap();
        assert_eq!(rows, set.rows);
    }
}

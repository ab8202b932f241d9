use std::io::{self, Write};

use clap::ValueEnum;
use serde_json::{json, Map, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(u64),
    Real(f64),
    Text(String),
    Bool(bool),
    Ints(Vec<usize>),
    Missing,
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
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

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Value::Missing, Value::Real)
    }
}

impl Value {
    fn to_json(&self) -> Json {
        match self {
            Value::Int(v) => json!(v),
            Value::Real(v) if v.is_finite() => json!(v),
            Value::Real(v) => Json::String(non_finite(*v).to_string()),
            Value::Text(s) => Json::String(s.clone()),
            Value::Bool(b) => json!(b),
            Value::Ints(v) => json!(v),
            Value::Missing => Json::Null,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Real(v) => format_real(*v),
            Value::Text(s) => quote(s),
            Value::Bool(b) => b.to_string(),
            Value::Ints(v) => v
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            Value::Missing => "NA".to_string(),
        }
    }
}

fn non_finite(v: f64) -> &'static str {
    if v.is_nan() {
        "NaN"
    } else if v > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// 15 significant digits, fixed notation for moderate magnitudes and
/// scientific otherwise, trailing zeros removed.
pub fn format_real(v: f64) -> String {
    if !v.is_finite() {
        return non_finite(v).to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{v:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A command's result: the echoed parameters and a table of rows.
#[derive(Debug, Clone)]
pub struct Record {
    pub command: String,
    pub parameters: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Record {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            parameters: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn param(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.parameters.push((name.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_json(&self) -> Json {
        let params: Map<String, Json> = self
            .parameters
            .iter()
            .map(|(k, v)| (k.clone(), v.to_json()))
            .collect();
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Json> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), v.to_json()))
                    .collect();
                Json::Object(obj)
            })
            .collect();
        json!({ "command": self.command, "parameters": params, "rows": rows })
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::to_csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("valid JSON");
                s.push('\n');
                s
            }
        }
    }

    pub fn write(&self, format: Format) -> io::Result<()> {
        io::stdout()
            .lock()
            .write_all(self.render(format).as_bytes())
    }
}

//! JSON and CSV emission. Every float is written with 17 significant digits;
//! non-finite values become `null` in JSON and an empty CSV field.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Number, Value};
use uhlmann_core::{CMatrix, Error, ExprError, RMatrix};

use crate::config::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn float_text(x: f64) -> String {
    if x.is_finite() {
        // `+ 0.0` folds negative zero into zero.
        format!("{:.16e}", x + 0.0)
    } else {
        String::new()
    }
}

pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    // arbitrary_precision keeps the literal digits.
    Value::Number(
        float_text(x)
            .parse::<Number>()
            .expect("formatted float is valid JSON"),
    )
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(num).collect())
}

/// Row-major nested arrays.
pub fn real_matrix(m: &RMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| num(m[(r, c)])).collect()))
            .collect(),
    )
}

/// Row-major nested arrays of `[re, im]` pairs.
pub fn complex_matrix(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| {
                Value::Array(
                    (0..m.ncols())
                        .map(|c| json!([num(m[(r, c)].re), num(m[(r, c)].im)]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn coords_object(params: &[String], coords: &[f64]) -> Value {
    let mut obj = Map::new();
    for (name, x) in params.iter().zip(coords) {
        obj.insert(name.clone(), num(*x));
    }
    Value::Object(obj)
}

pub fn error_value(e: &Error) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(e.kind()));
    obj.insert("message".into(), json!(e.to_string()));
    Value::Object(obj)
}

pub fn expr_error_value(e: &ExprError) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(e.kind()));
    obj.insert("message".into(), json!(e.to_string()));
    match e {
        ExprError::Syntax { offset, .. } | ExprError::UnknownIdentifier { offset, .. } => {
            obj.insert("offset".into(), json!(offset));
        }
        ExprError::Domain { span, .. } => {
            obj.insert("span".into(), json!([span.start, span.end]));
        }
        _ => {}
    }
    Value::Object(obj)
}

/// Accumulates CSV rows in memory.
pub struct CsvTable {
    writer: csv::Writer<Vec<u8>>,
    preamble: String,
}

impl CsvTable {
    pub fn new(header: &[String]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self {
            writer,
            preamble: String::new(),
        }
    }

    /// Metadata line written before the header as `# text`.
    pub fn comment(&mut self, text: &str) {
        self.preamble.push_str("# ");
        self.preamble.push_str(text);
        self.preamble.push('\n');
    }

    pub fn row(&mut self, fields: &[String]) {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn finish(self) -> String {
        let body = self.writer.into_inner().expect("in-memory flush");
        self.preamble + &String::from_utf8(body).expect("csv output is UTF-8")
    }
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Write to `--out` or stdout.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), ConfigError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

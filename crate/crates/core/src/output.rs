//! Canonical JSON: sorted keys, two-space indentation, floats with 17
//! significant digits, non-finite floats as `null`.

use serde::Serialize;
use serde_json::Value;

use crate::error::{LabError, Result};

/// One pass/fail probe in a verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check_name: String,
    pub parameters: Value,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(
        check_name: impl Into<String>,
        parameters: impl Serialize,
        statistic: f64,
        threshold: f64,
        pass: bool,
    ) -> Result<Self> {
        Ok(CheckRecord {
            check_name: check_name.into(),
            parameters: to_value(&parameters)?,
            statistic,
            threshold,
            pass,
        })
    }

    /// Passing when `statistic ≤ threshold`.
    pub fn at_most(
        check_name: impl Into<String>,
        parameters: impl Serialize,
        statistic: f64,
        threshold: f64,
    ) -> Result<Self> {
        Self::new(
            check_name,
            parameters,
            statistic,
            threshold,
            statistic <= threshold,
        )
    }
}

pub fn to_value<T: Serialize + ?Sized>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| LabError::Serialization(e.to_string()))
}

pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = String::new();
    write_value(&to_value(value)?, 0, &mut out);
    out.push('\n');
    Ok(out)
}

/// `{:.16e}`; a float that serde turned into an integer stays an integer.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(v: &Value, level: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(level + 1, out);
                write_value(item, level + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(level, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                indent(level + 1, out);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(&map[*k], level + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            indent(level, out);
            out.push('}');
        }
    }
}

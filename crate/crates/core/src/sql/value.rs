//! Cell values and declared column types.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Number,
    Text,
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnType::Number => "number",
            ColumnType::Text => "text",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Null,
    Number(f64),
    Text(String),
}

impl Value {
    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }

    /// Comparison under `=`/`<` semantics: `None` when either side is Null
    /// or the types differ.
    pub fn sql_cmp(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a.partial_cmp(b),
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }

    /// Total order for sorting and grouping: Numbers, then Text, then Null.
    /// Within a typed column this is numeric / code-point order, Nulls last.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        fn rank(v: &Value) -> u8 {
            match v {
                Value::Number(_) => 0,
                Value::Text(_) => 1,
                Value::Null => 2,
            }
        }
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a.total_cmp(b),
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            _ => rank(self).cmp(&rank(other)),
        }
    }

    /// Hashable identity for join keys and groups. `-0` and `0` coincide.
    pub(crate) fn key(&self) -> Key {
        match self {
            Value::Null => Key::Null,
            Value::Number(x) => Key::Number(normalize_zero(*x).to_bits()),
            Value::Text(s) => Key::Text(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Key {
    Null,
    Number(u64),
    Text(String),
}

pub(crate) fn normalize_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Parse a cell as a number after dropping whitespace and commas used as
/// grouping separators (`"15 092"`, `"1,234.5"`). Accepts an optional sign,
/// digits and an optional fraction; no exponents, no inf/nan.
pub fn parse_number(cell: &str) -> Option<f64> {
    let cleaned: String = cell
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .collect();
    let body = cleaned
        .strip_prefix('-')
        .or_else(|| cleaned.strip_prefix('+'))
        .unwrap_or(&cleaned);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let ok = match frac {
        None => digits(int),
        Some(f) => digits(f) && (int.is_empty() || digits(int)),
    };
    if !ok {
        return None;
    }
    cleaned.parse::<f64>().ok().map(normalize_zero)
}

/// How a numeric result column prints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumberFormat {
    /// Shortest round-trip form; integral values carry no fraction.
    #[default]
    Minimal,
    /// As `Minimal`, but always with at least one decimal (`15976.0`).
    OneDecimal,
}

pub fn format_number(x: f64, format: NumberFormat) -> String {
    let s = format!("{}", normalize_zero(x));
    match format {
        NumberFormat::OneDecimal if x.is_finite() && !s.contains('.') => s + ".0",
        _ => s,
    }
}

pub fn format_value(v: &Value, format: NumberFormat) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(x) => format_number(*x, format),
        Value::Text(s) => s.clone(),
    }
}

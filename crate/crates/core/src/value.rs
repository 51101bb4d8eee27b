//! Scalar cell values, storage kinds and ISO-8601 timestamp handling.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// Physical storage of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageKind {
    Float64,
    Utf8,
    /// Milliseconds since the Unix epoch, UTC.
    Timestamp,
}

impl StorageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StorageKind::Float64 => "float64",
            StorageKind::Utf8 => "utf8",
            StorageKind::Timestamp => "timestamp",
        }
    }
}

/// A single cell.
///
/// Equality and hashing are exact: numbers compare by bit pattern, so
/// constructors normalize `-0.0` to `0.0`. NaN never enters a dataset.
#[derive(Debug, Clone)]
pub enum Scalar {
    Null,
    Number(f64),
    Text(String),
    Timestamp(i64),
}

impl Scalar {
    pub fn number(v: f64) -> Scalar {
        Scalar::Number(normalize_zero(v))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Scalar::Null)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Number(v) => Some(*v),
            Scalar::Timestamp(ms) => Some(*ms as f64),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Scalar::Null => 0,
            Scalar::Number(_) => 1,
            Scalar::Timestamp(_) => 2,
            Scalar::Text(_) => 3,
        }
    }

    /// Total order used for group keys, pivot headers and sorting: nulls
    /// first, numbers numerically, text byte-wise.
    pub fn total_cmp(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Number(a), Scalar::Number(b)) => a.total_cmp(b),
            (Scalar::Text(a), Scalar::Text(b)) => a.as_bytes().cmp(b.as_bytes()),
            (Scalar::Timestamp(a), Scalar::Timestamp(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }

    /// Plain-text rendering used for CSV round trips and labels.
    pub fn to_text(&self) -> String {
        match self {
            Scalar::Null => String::new(),
            Scalar::Number(v) => format_number(*v),
            Scalar::Text(s) => s.clone(),
            Scalar::Timestamp(ms) => format_timestamp(*ms),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Scalar::Null => serde_json::Value::Null,
            Scalar::Number(v) => number_to_json(*v),
            Scalar::Text(s) => serde_json::Value::String(s.clone()),
            Scalar::Timestamp(ms) => serde_json::Value::String(format_timestamp(*ms)),
        }
    }

    /// Reads a JSON scalar. Strings stay text; callers that know the
    /// target column is temporal convert them with [`parse_timestamp`].
    pub fn from_json(value: &serde_json::Value) -> Option<Scalar> {
        match value {
            serde_json::Value::Null => Some(Scalar::Null),
            serde_json::Value::Number(n) => n.as_f64().map(Scalar::number),
            serde_json::Value::String(s) => Some(Scalar::Text(s.clone())),
            _ => None,
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Null, Scalar::Null) => true,
            (Scalar::Number(a), Scalar::Number(b)) => a.to_bits() == b.to_bits(),
            (Scalar::Text(a), Scalar::Text(b)) => a == b,
            (Scalar::Timestamp(a), Scalar::Timestamp(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Scalar::Null => {}
            Scalar::Number(v) => v.to_bits().hash(state),
            Scalar::Text(s) => s.hash(state),
            Scalar::Timestamp(ms) => ms.hash(state),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Null => f.write_str("null"),
            other => f.write_str(&other.to_text()),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        Scalar::from_json(&value)
            .ok_or_else(|| de::Error::custom("expected a scalar (null, number or string)"))
    }
}

pub(crate) fn normalize_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// Integral values inside the exactly-representable range print without a
/// fractional part; everything else uses the shortest round-trip form.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 9.007_199_254_740_992e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

pub(crate) fn number_to_json(v: f64) -> serde_json::Value {
    if v.fract() == 0.0 && v.abs() < 9.007_199_254_740_992e15 {
        serde_json::Value::from(v as i64)
    } else {
        serde_json::Number::from_f64(v)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

/// Parses a decimal number in plain or exponent notation. Words such as
/// `inf` or `NaN` are not numbers here.
pub fn parse_number(text: &str) -> Option<f64> {
    let s = text.trim();
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], Some(&body[pos + 1..])),
        None => (body, None),
    };
    let mut parts = mantissa.splitn(2, '.');
    let int_part = parts.next().unwrap_or("");
    let frac_part = parts.next();
    let digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if !digits(int_part) || !frac_part.is_none_or(digits) {
        return None;
    }
    if int_part.is_empty() && frac_part.is_none_or(str::is_empty) {
        return None;
    }
    if let Some(exp) = exponent {
        let exp = exp.strip_prefix(['+', '-']).unwrap_or(exp);
        if exp.is_empty() || !digits(exp) {
            return None;
        }
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite()).map(normalize_zero)
}

/// Parses `YYYY-MM-DD` or `YYYY-MM-DDTHH:MM:SS[.fff][Z]` into epoch
/// milliseconds (UTC).
pub fn parse_timestamp(text: &str) -> Option<i64> {
    let s = text.trim();
    let bytes = s.as_bytes();
    if bytes.len() < 10 || bytes[4] != b'-' || bytes[7] != b'-' {
        return None;
    }
    if !bytes[..4].iter().all(u8::is_ascii_digit) {
        return None;
    }
    if bytes.len() == 10 {
        let date = NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()?;
        return Some(date.and_hms_opt(0, 0, 0)?.and_utc().timestamp_millis());
    }
    if bytes[10] != b'T' {
        return None;
    }
    let s = s.strip_suffix('Z').unwrap_or(s);
    let dt = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f").ok()?;
    Some(dt.and_utc().timestamp_millis())
}

/// Midnight timestamps print as a bare date; anything else as a full UTC
/// date-time with a `Z` suffix.
pub fn format_timestamp(ms: i64) -> String {
    let Some(dt) = DateTime::from_timestamp_millis(ms) else {
        return ms.to_string();
    };
    let naive = dt.naive_utc();
    if ms.rem_euclid(86_400_000) == 0 {
        naive.format("%Y-%m-%d").to_string()
    } else if ms.rem_euclid(1000) == 0 {
        naive.format("%Y-%m-%dT%H:%M:%SZ").to_string()
    } else {
        naive.format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string()
    }
}

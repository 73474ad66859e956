//! Canonical JSON encoding.
//!
//! Every persisted or exchanged document (repository archives, workflow
//! files, run records) goes through this encoder so that equal values always
//! produce equal bytes:
//!
//! - object keys sorted lexicographically (by UTF-8 bytes),
//! - no insignificant whitespace,
//! - integers printed without a fraction, other numbers in the shortest
//!   round-trip form, which never carries trailing zeros.

use serde::Serialize;
use serde_json::{Number, Value};

/// Serialize `value` into canonical JSON bytes.
pub fn to_vec<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<Vec<u8>> {
    let tree = serde_json::to_value(value)?;
    Ok(value_to_vec(&tree))
}

/// Canonical JSON as a `String`.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    // The encoder only emits valid UTF-8.
    to_vec(value).map(|bytes| String::from_utf8(bytes).expect("canonical JSON is UTF-8"))
}

/// Encode an already-built JSON tree.
pub fn value_to_vec(value: &Value) -> Vec<u8> {
    let mut out = Vec::with_capacity(256);
    write_value(&mut out, value);
    out
}

fn write_value(out: &mut Vec<u8>, value: &Value) {
    match value {
        Value::Null => out.extend_from_slice(b"null"),
        Value::Bool(true) => out.extend_from_slice(b"true"),
        Value::Bool(false) => out.extend_from_slice(b"false"),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => write_string(out, s),
        Value::Array(items) => {
            out.push(b'[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write_value(out, item);
            }
            out.push(b']');
        }
        Value::Object(map) => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
            out.push(b'{');
            for (i, (key, item)) in entries.into_iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write_string(out, key);
                out.push(b':');
                write_value(out, item);
            }
            out.push(b'}');
        }
    }
}

fn write_string(out: &mut Vec<u8>, s: &str) {
    // serde_json's string escaping is already minimal and deterministic.
    let escaped = serde_json::to_string(s).expect("string serialization cannot fail");
    out.extend_from_slice(escaped.as_bytes());
}

fn write_number(out: &mut Vec<u8>, n: &Number) {
    if let Some(u) = n.as_u64() {
        out.extend_from_slice(u.to_string().as_bytes());
    } else if let Some(i) = n.as_i64() {
        out.extend_from_slice(i.to_string().as_bytes());
    } else {
        let f = n.as_f64().unwrap_or(0.0);
        out.extend_from_slice(format_float(f).as_bytes());
    }
}

/// Shortest decimal form of a finite float with no trailing zeros and no
/// exponent. Integral values print without a fraction.
pub fn format_float(f: f64) -> String {
    if f == 0.0 {
        return "0".to_string();
    }
    if f.fract() == 0.0 && f.abs() < 1e15 {
        return format!("{}", f as i64);
    }
    // `Display` for f64 yields the shortest string that round-trips.
    format!("{f}")
}

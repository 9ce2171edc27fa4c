//! Canonical JSON and CSV text.
//!
//! Floats are written with 17 significant digits in exponent form and object
//! keys are sorted, so equal inputs always give equal bytes.

use std::fmt::Write;

use serde_json::Value;

/// A float with 17 significant digits; non-finite values become `null`.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&float(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                write!(out, "{n}").expect("writing to a string");
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
                pad(out, indent + 2);
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
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
                pad(out, indent + 2);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*k], indent + 2);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Pretty, canonical JSON with a trailing newline.
pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// Pre-measure table with columns `depth,t,value`.
pub fn premeasure_csv(rows: &[subarcs_core::arcs::PremeasureSample]) -> String {
    let mut out = String::from("depth,t,value\n");
    for r in rows {
        writeln!(out, "{},{},{}", r.depth, float(r.t), float(r.value)).expect("writing to a string");
    }
    out
}

/// Interval dump with columns `node,lo,hi`.
pub fn intervals_csv(sets: &[subarcs_core::measures::MeasureSetApprox]) -> String {
    let mut out = String::from("node,lo,hi\n");
    for s in sets {
        for (lo, hi) in &s.intervals {
            writeln!(out, "{},{},{}", s.node, float(*lo), float(*hi)).expect("writing to a string");
        }
    }
    out
}

//! Deterministic number formatting for CSV and JSON output.

use serde::Serialize;
use serde_json::Value;

use preempt::Threshold;

/// Rounds to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// A number with at most 12 significant digits, `inf`/`-inf` for
/// infinities and `nan` for undefined values.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        let r = round12(v);
        // Avoid "-0".
        if r == 0.0 {
            "0".into()
        } else {
            r.to_string()
        }
    }
}

pub fn thr(t: Threshold) -> String {
    num(t.value())
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(|| "na".into(), num)
}

pub fn opt_bool(v: Option<bool>) -> String {
    v.map_or_else(|| "na".into(), |b| b.to_string())
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()) {
                if let Some(r) = serde_json::Number::from_f64(round12(f)) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn json<T: Serialize>(v: &T) -> String {
    let mut v = serde_json::to_value(v).expect("serializable output");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("valid json");
    s.push('\n');
    s
}

/// CSV with a header row; fields never contain commas.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

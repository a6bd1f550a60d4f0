//! JSON emission with 17 significant digits and the convention block.

use crate::ehspace::l2_norm_omega;
use crate::error::{Error, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use std::fmt::Write;

/// `v` with 17 significant digits, so it parses back to the same `f64`.
/// Negative zero prints as zero.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        "0.0000000000000000e0".into()
    } else if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convention {
    pub orientation: &'static str,
    pub form_norm: &'static str,
    pub sphere_volume: f64,
    pub omega_norm_sq: f64,
    pub omega_norm_method: &'static str,
}

pub fn convention() -> Result<Convention> {
    Ok(Convention {
        orientation: "dx1^dx2^dx3^dx4",
        form_norm: "dx^i^dx^j (i<j) orthonormal, |F|^2 = (1/2) F_ab F^ab",
        sphere_volume: 2.0 * std::f64::consts::PI.powi(2),
        omega_norm_sq: l2_norm_omega()?,
        omega_norm_method: "U(2)-invariant radial reduction, Gauss-Legendre panels to r = 1024, analytic tail bound",
    })
}

/// `body` with a `convention` entry added, pretty-printed with every float
/// at 17 significant digits. Object keys keep their declaration order.
pub fn to_json<T: Serialize>(body: &T) -> Result<String> {
    let mut v = serde_json::to_value(body).map_err(|e| Error::Internal(format!("serialize: {e}")))?;
    let conv = serde_json::to_value(convention()?).map_err(|e| Error::Internal(format!("serialize: {e}")))?;
    match &mut v {
        Value::Object(m) => {
            m.insert("convention".into(), conv);
        }
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other.take());
            m.insert("convention".into(), conv);
            v = Value::Object(m);
        }
    }
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.push_str(&"  ".repeat(d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.iter().all(|x| x.is_number()) {
                out.push('[');
                for (k, x) in a.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, depth);
                }
                out.push(']');
                return;
            }
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, x) in a.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, x, depth + 1);
                if k + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, x)) in m.iter().enumerate() {
                pad(out, depth + 1);
                let _ = write!(out, "{}: ", Value::String(key.clone()));
                write_value(out, x, depth + 1);
                if k + 1 < m.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

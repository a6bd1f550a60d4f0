//! Text format for jets: one record `i j k l value` per line, indices
//! 1-based, separated by whitespace or commas. `#` starts a comment.
//! Unlisted entries are zero. Each record also sets its images under
//! `i ↔ j` and `k ↔ l`; two records for the same entry must agree.

use super::QuadJet;
use crate::error::{Error, Result};
use crate::lin4::{sym_index, SYM_PAIRS};
use std::path::Path;

pub fn parse_jet(text: &str) -> Result<QuadJet> {
    let mut h = QuadJet::zero();
    // line of the record that fixed each (ij, kl) slot
    let mut seen = [[0usize; 10]; 10];
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if fields.len() != 5 {
            return Err(Error::Load {
                line,
                message: format!("expected `i j k l value`, found {} fields", fields.len()),
            });
        }
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[..4]) {
            *slot = match f.parse::<usize>() {
                Ok(v @ 1..=4) => v - 1,
                _ => {
                    return Err(Error::Load {
                        line,
                        message: format!("index {f:?} is not in 1..=4"),
                    })
                }
            };
        }
        let value: f64 = fields[4].parse().map_err(|_| Error::Load {
            line,
            message: format!("value {:?} is not a number", fields[4]),
        })?;
        if !value.is_finite() {
            return Err(Error::Load {
                line,
                message: "value must be finite".into(),
            });
        }
        let [i, j, k, l] = idx;
        let (p, q) = (sym_index(i, j), sym_index(k, l));
        if seen[p][q] != 0 {
            let old = h.get(i, j, k, l);
            if old != value {
                let (a, b) = SYM_PAIRS[p];
                let (c, d) = SYM_PAIRS[q];
                return Err(Error::Load {
                    line,
                    message: format!(
                        "H[{} {} {} {}] = {value} conflicts with {old} set on line {}",
                        a + 1,
                        b + 1,
                        c + 1,
                        d + 1,
                        seen[p][q]
                    ),
                });
            }
            continue;
        }
        seen[p][q] = line;
        h.set(i, j, k, l, value);
    }
    Ok(h)
}

pub fn load_jet(path: &Path) -> Result<QuadJet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_jet(&text)
}

/// Nonzero entries with `i ≤ j`, `k ≤ l`, values at 17 significant digits.
pub fn format_jet(h: &QuadJet) -> String {
    let mut out = String::new();
    for &(i, j) in SYM_PAIRS.iter() {
        for &(k, l) in SYM_PAIRS.iter() {
            let v = h.get(i, j, k, l);
            if v != 0.0 {
                out.push_str(&format!("{} {} {} {} {:.16e}\n", i + 1, j + 1, k + 1, l + 1, v));
            }
        }
    }
    out
}

//! Plain-text code files.
//!
//! ```text
//! # comment
//! ring: Z4
//! n: 2
//! generators:
//! 1 0 | 0 1
//! 0 1 | 1 0
//! ```
//!
//! Each generator row holds `2n` element codes; a `|` between the two halves
//! is optional. An empty generator list is the zero code.

use std::fmt::Write as _;

use crate::code::Code;
use crate::error::{Error, Result};
use crate::ring::{Elem, LocalRing};

pub fn parse_code_file(text: &str) -> Result<Code> {
    let mut ring = None;
    let mut n = None;
    let mut rows: Option<Vec<Vec<Elem>>> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::invalid(format!("line {}: {msg}", lineno + 1));
        if let Some(rows) = rows.as_mut() {
            let r: &std::sync::Arc<LocalRing> = ring.as_ref().expect("checked at generators:");
            let n: usize = n.expect("checked at generators:");
            let row = line
                .split_whitespace()
                .filter(|t| *t != "|")
                .map(|t| {
                    t.parse::<u32>()
                        .ok()
                        .filter(|&x| (x as usize) < r.size())
                        .map(|x| x as Elem)
                        .ok_or_else(|| bad(format!("bad element code {t:?} for {}", r.name())))
                })
                .collect::<Result<Vec<Elem>>>()?;
            if row.len() != 2 * n {
                return Err(bad(format!("row has {} entries, expected {}", row.len(), 2 * n)));
            }
            rows.push(row);
            continue;
        }
        if line == "generators:" {
            if ring.is_none() || n.is_none() {
                return Err(bad("`ring:` and `n:` must precede `generators:`".into()));
            }
            rows = Some(Vec::new());
            continue;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| bad(format!("unexpected {line:?}")))?;
        match key.trim() {
            "ring" => ring = Some(LocalRing::parse(value.trim()).map_err(|e| bad(e.to_string()))?),
            "n" => {
                let v: usize = value.trim().parse().map_err(|_| bad(format!("bad length {:?}", value.trim())))?;
                if v == 0 {
                    return Err(bad("n must be positive".into()));
                }
                n = Some(v);
            }
            other => return Err(bad(format!("unknown header {other:?}"))),
        }
    }
    let rows = rows.ok_or_else(|| Error::invalid("missing `generators:` section"))?;
    Code::new(ring.expect("present"), n.expect("present"), rows)
}

/// Canonical text for a code: legend comment (non-`Z_N` rings), headers,
/// then one row per generator with a `|` after column `n`.
pub fn emit_code_file(code: &Code) -> String {
    let ring = code.ring();
    let mut out = String::new();
    if let Some(legend) = ring.legend() {
        writeln!(out, "# legend: {legend}").unwrap();
    }
    writeln!(out, "ring: {}", ring.spec()).unwrap();
    writeln!(out, "n: {}", code.n()).unwrap();
    out.push_str("generators:\n");
    for g in code.generators() {
        out.push_str(&format_row(g));
        out.push('\n');
    }
    out
}

/// `a_1 .. a_n | b_1 .. b_n`.
pub fn format_row(v: &[Elem]) -> String {
    let n = v.len() / 2;
    let half = |s: &[Elem]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    format!("{} | {}", half(&v[..n]), half(&v[n..]))
}

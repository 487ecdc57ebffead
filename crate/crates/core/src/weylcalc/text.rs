//! Plain-text form of a [`PhasePolynomial`]:
//!
//! ```text
//! # phasepoly d=2
//! <re> <im> <k> <alpha_1> .. <alpha_d> <beta_1> .. <beta_d>
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so parsing restores the
//! coefficients bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use super::poly::{Monomial, PhasePolynomial};
use crate::error::{Error, Result};

pub fn to_text(f: &PhasePolynomial) -> String {
    let mut s = format!("# phasepoly d={}\n", f.dim());
    for (m, c) in f.terms() {
        write!(s, "{} {} {}", c.re, c.im, m.hbar).unwrap();
        for a in m.p.iter().chain(&m.q) {
            write!(s, " {a}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn from_text(text: &str) -> Result<PhasePolynomial> {
    let mut dim = None;
    let mut terms = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |msg: String| Error::Parse { line: n + 1, msg };
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            if let Some(d) = h.trim().strip_prefix("phasepoly d=") {
                dim = Some(d.trim().parse::<usize>().map_err(|e| err(e.to_string()))?);
            }
            continue;
        }
        let d = dim.ok_or_else(|| err("missing `# phasepoly d=` header".into()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 + 2 * d {
            return Err(err(format!("expected {} fields, found {}", 3 + 2 * d, fields.len())));
        }
        let re: f64 = fields[0].parse().map_err(|e: std::num::ParseFloatError| err(e.to_string()))?;
        let im: f64 = fields[1].parse().map_err(|e: std::num::ParseFloatError| err(e.to_string()))?;
        let ints = fields[2..]
            .iter()
            .map(|t| t.parse::<u32>())
            .collect::<std::result::Result<Vec<u32>, _>>()
            .map_err(|e| err(e.to_string()))?;
        let m = Monomial { hbar: ints[0], p: ints[1..=d].to_vec(), q: ints[d + 1..].to_vec() };
        if terms.insert(m, Complex64::new(re, im)).is_some() {
            return Err(err("duplicate monomial".into()));
        }
    }
    let dim = dim.ok_or(Error::Parse { line: 0, msg: "empty input".into() })?;
    Ok(PhasePolynomial::from_map_exact(dim, terms))
}

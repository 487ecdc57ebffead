use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::poly::{Monomial, PhasePolynomial};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Position,
    Momentum,
}

/// One factor `q̂_μ^e` or `p̂_μ^e` of an operator word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Generator {
    pub kind: Kind,
    /// 1-based mode index.
    pub mode: usize,
    pub exp: u32,
}

/// An ordered product of position and momentum operators with a scalar prefactor.
/// The empty word is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorWord {
    pub factors: Vec<Generator>,
    pub prefactor: Complex64,
}

impl OperatorWord {
    pub fn new(factors: Vec<Generator>) -> Result<Self> {
        Self::with_prefactor(factors, Complex64::new(1.0, 0.0))
    }

    pub fn with_prefactor(factors: Vec<Generator>, prefactor: Complex64) -> Result<Self> {
        for g in &factors {
            if g.mode == 0 {
                return Err(Error::InvalidArgument("mode indices start at 1".into()));
            }
            if g.exp == 0 {
                return Err(Error::InvalidArgument("exponents must be at least 1".into()));
            }
        }
        Ok(OperatorWord { factors, prefactor })
    }

    pub fn identity() -> Self {
        OperatorWord { factors: Vec::new(), prefactor: Complex64::new(1.0, 0.0) }
    }

    /// Smallest phase-space dimension that hosts every factor (at least 1).
    pub fn min_dim(&self) -> usize {
        self.factors.iter().map(|g| g.mode).max().unwrap_or(1)
    }

    /// Formal adjoint: reversed factor order and conjugated prefactor.
    pub fn adjoint(&self) -> Self {
        let mut factors = self.factors.clone();
        factors.reverse();
        OperatorWord { factors, prefactor: self.prefactor.conj() }
    }

    /// Formal self-adjointness, comparing factor lists after merging
    /// adjacent powers of the same generator.
    pub fn is_self_adjoint(&self) -> bool {
        let a = self.adjoint();
        merged(&self.factors) == merged(&a.factors) && self.prefactor.im == 0.0
    }

    /// Weyl symbol in dimension `min_dim()`.
    pub fn weyl_symbol(&self) -> PhasePolynomial {
        self.weyl_symbol_in(self.min_dim()).expect("min_dim hosts every factor")
    }

    /// Weyl symbol as a left-to-right star-product fold in dimension `dim`.
    pub fn weyl_symbol_in(&self, dim: usize) -> Result<PhasePolynomial> {
        if dim < self.min_dim() {
            return Err(Error::DimensionMismatch { expected: self.min_dim(), found: dim });
        }
        let mut acc = PhasePolynomial::constant(dim, self.prefactor);
        for g in &self.factors {
            let mut m = Monomial::one(dim);
            match g.kind {
                Kind::Position => m.q[g.mode - 1] = g.exp,
                Kind::Momentum => m.p[g.mode - 1] = g.exp,
            }
            acc = acc.star(&PhasePolynomial::monomial(m, Complex64::new(1.0, 0.0)))?;
        }
        Ok(acc)
    }

    /// The symbol grouped by ħ power: `Σ_k ħ^k · entry_k` reproduces the symbol,
    /// and each entry is the classical function of a Weyl-ordered operator.
    pub fn weyl_order_decompose(&self) -> Vec<(u32, PhasePolynomial)> {
        let s = self.weyl_symbol();
        s.hbar_powers().into_iter().map(|k| (k, s.hbar_slice(k))).collect()
    }
}

fn merged(factors: &[Generator]) -> Vec<Generator> {
    let mut out: Vec<Generator> = Vec::new();
    for g in factors {
        match out.last_mut() {
            Some(l) if l.kind == g.kind && l.mode == g.mode => l.exp += g.exp,
            _ => out.push(*g),
        }
    }
    out
}

impl FromStr for OperatorWord {
    type Err = Error;

    /// Parses whitespace-separated factors such as `q p q p`, `q1^2 p2`, `p^3`.
    /// A leading `1` or empty string is the identity.
    fn from_str(s: &str) -> Result<Self> {
        let mut factors = Vec::new();
        for tok in s.split(|c: char| c.is_whitespace() || c == '*').filter(|t| !t.is_empty()) {
            if tok == "1" {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: 1, msg: format!("{msg}: `{tok}`") };
            let kind = match tok.chars().next() {
                Some('q') => Kind::Position,
                Some('p') => Kind::Momentum,
                _ => return Err(err("expected q or p")),
            };
            let rest = &tok[1..];
            let (mode_s, exp_s) = match rest.split_once('^') {
                Some((m, e)) => (m, Some(e)),
                None => (rest, None),
            };
            let mode = if mode_s.is_empty() {
                1
            } else {
                mode_s.parse::<usize>().map_err(|_| err("bad mode index"))?
            };
            let exp = match exp_s {
                Some(e) => e.parse::<u32>().map_err(|_| err("bad exponent"))?,
                None => 1,
            };
            if mode == 0 || exp == 0 {
                return Err(err("mode and exponent must be positive"));
            }
            factors.push(Generator { kind, mode, exp });
        }
        OperatorWord::new(factors)
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|g| {
                let k = if g.kind == Kind::Position { 'q' } else { 'p' };
                if g.exp == 1 {
                    format!("{k}{}", g.mode)
                } else {
                    format!("{k}{}^{}", g.mode, g.exp)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

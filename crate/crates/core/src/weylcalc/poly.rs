use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const PRUNE_REL: f64 = 1e-14;

/// A monomial `ħ^hbar · Π p_μ^{p[μ]} q_μ^{q[μ]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub p: Vec<u32>,
    pub q: Vec<u32>,
    pub hbar: u32,
}

impl Monomial {
    pub fn one(dim: usize) -> Self {
        Monomial { p: vec![0; dim], q: vec![0; dim], hbar: 0 }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// Phase-space degree |α|+|β| (ħ not counted).
    pub fn degree(&self) -> u32 {
        self.p.iter().sum::<u32>() + self.q.iter().sum::<u32>()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial {
            p: self.p.iter().zip(&other.p).map(|(a, b)| a + b).collect(),
            q: self.q.iter().zip(&other.q).map(|(a, b)| a + b).collect(),
            hbar: self.hbar + other.hbar,
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.p.cmp(&other.p))
            .then_with(|| self.q.cmp(&other.q))
            .then_with(|| self.hbar.cmp(&other.hbar))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Complex polynomial in `(p, q)` graded by a formal power of ħ.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePolynomial {
    dim: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

/// Enumerate every multi-index `a` with `0 <= a[μ] <= bound[μ]`.
fn multi_indices(bound: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::with_capacity(bound.len())];
    for &b in bound {
        let mut next = Vec::with_capacity(out.len() * (b as usize + 1));
        for prefix in &out {
            for v in 0..=b {
                let mut idx = prefix.clone();
                idx.push(v);
                next.push(idx);
            }
        }
        out = next;
    }
    out
}

fn i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl PhasePolynomial {
    pub fn zero(dim: usize) -> Self {
        PhasePolynomial { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self::from_terms(dim, [(Monomial::one(dim), c)])
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Complex64::new(1.0, 0.0))
    }

    /// The coordinate `q_μ` (mode index `mu` is 1-based).
    pub fn q(dim: usize, mu: usize) -> Self {
        let mut m = Monomial::one(dim);
        m.q[mu - 1] = 1;
        Self::from_terms(dim, [(m, Complex64::new(1.0, 0.0))])
    }

    /// The coordinate `p_μ` (mode index `mu` is 1-based).
    pub fn p(dim: usize, mu: usize) -> Self {
        let mut m = Monomial::one(dim);
        m.p[mu - 1] = 1;
        Self::from_terms(dim, [(m, Complex64::new(1.0, 0.0))])
    }

    /// The formal parameter ħ itself.
    pub fn hbar(dim: usize) -> Self {
        let mut m = Monomial::one(dim);
        m.hbar = 1;
        Self::from_terms(dim, [(m, Complex64::new(1.0, 0.0))])
    }

    pub fn monomial(m: Monomial, c: Complex64) -> Self {
        let dim = m.dim();
        Self::from_terms(dim, [(m, c)])
    }

    /// Build from `(monomial, coefficient)` pairs, summing duplicates.
    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Complex64)>,
    {
        let mut out = PhasePolynomial::zero(dim);
        for (m, c) in terms {
            assert_eq!(m.dim(), dim, "monomial dimension");
            *out.terms.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        out.prune();
        out
    }

    pub(crate) fn from_map_exact(dim: usize, terms: BTreeMap<Monomial, Complex64>) -> Self {
        let mut out = PhasePolynomial { dim, terms };
        out.terms.retain(|_, c| c.norm() != 0.0);
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn prune(&mut self) {
        let cut = PRUNE_REL * self.max_abs_coeff();
        self.terms.retain(|_, c| c.norm() > cut && c.norm() != 0.0);
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            *out.terms.entry(m.clone()).or_default() += c;
        }
        out.prune();
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.prune();
        out
    }

    /// Commutative pointwise product (ħ grades add).
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                *out.entry(m1.times(m2)).or_insert(Complex64::default()) += c1 * c2;
            }
        }
        let mut r = PhasePolynomial { dim: self.dim, terms: out };
        r.prune();
        Ok(r)
    }

    /// Moyal product. Terminates exactly for polynomials.
    pub fn star(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let d = self.dim;
        let mut out: BTreeMap<Monomial, Complex64> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                // a pairs ∂_q of the left factor with ∂_p of the right one;
                // b pairs ∂_p of the left factor with ∂_q of the right one.
                let a_bound: Vec<u32> = (0..d).map(|mu| m1.q[mu].min(m2.p[mu])).collect();
                let b_bound: Vec<u32> = (0..d).map(|mu| m1.p[mu].min(m2.q[mu])).collect();
                let a_set = multi_indices(&a_bound);
                let b_set = multi_indices(&b_bound);
                for a in &a_set {
                    for b in &b_set {
                        let n: u32 = a.iter().sum::<u32>() + b.iter().sum::<u32>();
                        let mut w = 0.5f64.powi(n as i32);
                        let mut sign_b = 0u32;
                        let mut m = Monomial {
                            p: vec![0; d],
                            q: vec![0; d],
                            hbar: m1.hbar + m2.hbar + n,
                        };
                        for mu in 0..d {
                            let (am, bm) = (a[mu], b[mu]);
                            w *= falling(m1.q[mu], am) * falling(m1.p[mu], bm);
                            w *= falling(m2.p[mu], am) * falling(m2.q[mu], bm);
                            w /= factorial(am) * factorial(bm);
                            sign_b += bm;
                            m.p[mu] = m1.p[mu] - bm + m2.p[mu] - am;
                            m.q[mu] = m1.q[mu] - am + m2.q[mu] - bm;
                        }
                        if sign_b % 2 == 1 {
                            w = -w;
                        }
                        let c = c1 * c2 * i_pow(n) * w;
                        *out.entry(m).or_default() += c;
                    }
                }
            }
        }
        let mut r = PhasePolynomial { dim: d, terms: out };
        r.prune();
        Ok(r)
    }

    /// Classical Poisson bracket `{f, g} = Σ ∂_q f ∂_p g − ∂_p f ∂_q g`.
    pub fn poisson(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut acc = PhasePolynomial::zero(self.dim);
        for mu in 1..=self.dim {
            let t1 = self.d_q(mu).try_mul(&other.d_p(mu))?;
            let t2 = self.d_p(mu).try_mul(&other.d_q(mu))?;
            acc = acc.try_add(&t1)?.try_add(&t2.scale(Complex64::new(-1.0, 0.0)))?;
        }
        Ok(acc)
    }

    fn derivative(&self, mu: usize, wrt_q: bool) -> Self {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = if wrt_q { m.q[mu - 1] } else { m.p[mu - 1] };
            if e == 0 {
                continue;
            }
            let mut nm = m.clone();
            if wrt_q {
                nm.q[mu - 1] -= 1;
            } else {
                nm.p[mu - 1] -= 1;
            }
            *out.entry(nm).or_insert(Complex64::default()) += c * e as f64;
        }
        PhasePolynomial::from_map_exact(self.dim, out)
    }

    pub fn d_q(&self, mu: usize) -> Self {
        self.derivative(mu, true)
    }

    pub fn d_p(&self, mu: usize) -> Self {
        self.derivative(mu, false)
    }

    /// Terms carrying exactly `ħ^k`, returned with the ħ power stripped.
    pub fn hbar_slice(&self, k: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.hbar == k)
            .map(|(m, c)| (Monomial { hbar: 0, ..m.clone() }, *c))
            .collect();
        PhasePolynomial::from_map_exact(self.dim, terms)
    }

    /// Sorted list of ħ powers present.
    pub fn hbar_powers(&self) -> Vec<u32> {
        let mut ks: Vec<u32> = self.terms.keys().map(|m| m.hbar).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// Substitute a numeric ħ, leaving a purely classical polynomial.
    pub fn at_hbar(&self, hbar: f64) -> Self {
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|(m, c)| (Monomial { hbar: 0, ..m.clone() }, c * hbar.powi(m.hbar as i32)))
            .collect();
        PhasePolynomial::from_terms(self.dim, terms)
    }

    /// Evaluate at `z = (p_1..p_d, q_1..q_d)` with numeric ħ.
    pub fn evaluate(&self, z: &[f64], hbar: f64) -> Result<Complex64> {
        if z.len() != 2 * self.dim {
            return Err(Error::DimensionMismatch { expected: 2 * self.dim, found: z.len() });
        }
        let (ps, qs) = z.split_at(self.dim);
        let mut acc = Complex64::default();
        for (m, c) in &self.terms {
            let mut v = hbar.powi(m.hbar as i32);
            for mu in 0..self.dim {
                v *= ps[mu].powi(m.p[mu] as i32) * qs[mu].powi(m.q[mu] as i32);
            }
            acc += c * v;
        }
        Ok(acc)
    }

    /// Complex conjugate of every coefficient.
    pub fn conj(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect();
        PhasePolynomial::from_map_exact(self.dim, terms)
    }

    /// True when every coefficient is real to within `tol` (relative to the largest).
    pub fn is_real(&self, tol: f64) -> bool {
        let s = self.max_abs_coeff().max(f64::MIN_POSITIVE);
        self.terms.values().all(|c| c.im.abs() <= tol * s)
    }

    /// Largest absolute coefficient difference against `other`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        for (m, c) in &self.terms {
            d = d.max((c - other.coeff(m)).norm());
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                d = d.max(c.norm());
            }
        }
        d
    }
}

/// The `ħ→0` limit together with the smallest positive ħ power present.
pub fn classical_limit(f: &PhasePolynomial) -> (PhasePolynomial, Option<u32>) {
    let m = f.hbar_powers().into_iter().find(|&k| k > 0);
    (f.hbar_slice(0), m)
}

impl Add for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn add(self, rhs: &PhasePolynomial) -> PhasePolynomial {
        self.try_add(rhs).expect("dimension mismatch in +")
    }
}

impl Sub for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn sub(self, rhs: &PhasePolynomial) -> PhasePolynomial {
        self.try_add(&-rhs).expect("dimension mismatch in -")
    }
}

impl Mul for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn mul(self, rhs: &PhasePolynomial) -> PhasePolynomial {
        self.try_mul(rhs).expect("dimension mismatch in *")
    }
}

impl Neg for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn neg(self) -> PhasePolynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

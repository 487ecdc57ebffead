//! Weyl calculus checked against a truncated oscillator-basis matrix
//! representation of q̂ and p̂ (ħ = 1), plus algebraic properties.

use ethweyl::weylcalc::{
    classical_limit, from_text, to_text, Generator, Kind, Monomial, OperatorWord, PhasePolynomial,
};
use ethweyl::Complex64;
use proptest::prelude::*;

const N: usize = 64;
const BLOCK: usize = 16;

#[derive(Clone)]
struct CMat {
    n: usize,
    a: Vec<Complex64>,
}

impl CMat {
    fn zeros(n: usize) -> Self {
        CMat { n, a: vec![Complex64::default(); n * n] }
    }
    fn eye(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }
    fn mul(&self, o: &CMat) -> CMat {
        let n = self.n;
        let mut r = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k];
                if x == Complex64::default() {
                    continue;
                }
                for j in 0..n {
                    r.a[i * n + j] += x * o.a[k * n + j];
                }
            }
        }
        r
    }
    fn add_scaled(&mut self, o: &CMat, c: Complex64) {
        for (x, y) in self.a.iter_mut().zip(&o.a) {
            *x += c * y;
        }
    }
    fn pow(&self, e: u32) -> CMat {
        (0..e).fold(Self::eye(self.n), |acc, _| acc.mul(self))
    }
}

fn q_and_p() -> (CMat, CMat) {
    let mut q = CMat::zeros(N);
    let mut p = CMat::zeros(N);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for n in 0..N - 1 {
        let r = ((n + 1) as f64).sqrt() * s;
        q.a[n * N + n + 1] = Complex64::new(r, 0.0);
        q.a[(n + 1) * N + n] = Complex64::new(r, 0.0);
        p.a[n * N + n + 1] = Complex64::new(0.0, -r);
        p.a[(n + 1) * N + n] = Complex64::new(0.0, r);
    }
    (q, p)
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Weyl quantization at ħ = 1 via the symmetric rule
/// `q^m p^n ↦ 2^{-m} Σ_j C(m,j) q̂^j p̂^n q̂^{m−j}`.
fn quantize(f: &PhasePolynomial, q: &CMat, p: &CMat) -> CMat {
    let mut out = CMat::zeros(N);
    for (m, c) in f.terms() {
        let (a, b) = (m.q[0], m.p[0]);
        let pn = p.pow(b);
        let mut t = CMat::zeros(N);
        for j in 0..=a {
            let term = q.pow(j).mul(&pn).mul(&q.pow(a - j));
            t.add_scaled(&term, Complex64::new(binom(a, j) / 2f64.powi(a as i32), 0.0));
        }
        out.add_scaled(&t, *c);
    }
    out
}

fn word_matrix(w: &OperatorWord, q: &CMat, p: &CMat) -> CMat {
    let mut m = CMat::eye(N);
    for g in &w.factors {
        let base = if g.kind == Kind::Position { q } else { p };
        m = m.mul(&base.pow(g.exp));
    }
    let mut out = CMat::zeros(N);
    out.add_scaled(&m, w.prefactor);
    out
}

fn block_rel_err(a: &CMat, b: &CMat) -> f64 {
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for i in 0..BLOCK {
        for j in 0..BLOCK {
            diff = diff.max((a.a[i * N + j] - b.a[i * N + j]).norm());
            scale = scale.max(a.a[i * N + j].norm());
        }
    }
    diff / scale.max(1e-300)
}

fn oracle_err(word: &str) -> f64 {
    let (q, p) = q_and_p();
    let w: OperatorWord = word.parse().unwrap();
    let sym = w.weyl_symbol().at_hbar(1.0);
    block_rel_err(&word_matrix(&w, &q, &p), &quantize(&sym, &q, &p))
}

#[test]
fn q_star_p_matches_matrices() {
    assert!(oracle_err("q p") < 1e-12);
    assert!(oracle_err("p q") < 1e-12);
}

#[test]
fn qpqp_symbol_from_matrices() {
    // The matrix oracle pins the symbol of q̂p̂q̂p̂ to q²p² + iħqp with no ħ² term.
    let w: OperatorWord = "q p q p".parse().unwrap();
    let sym = w.weyl_symbol();
    let mut want = PhasePolynomial::zero(1);
    let mut m = Monomial::one(1);
    m.q[0] = 2;
    m.p[0] = 2;
    want = &want + &PhasePolynomial::monomial(m, Complex64::new(1.0, 0.0));
    let mut m = Monomial::one(1);
    m.q[0] = 1;
    m.p[0] = 1;
    m.hbar = 1;
    want = &want + &PhasePolynomial::monomial(m, Complex64::new(0.0, 1.0));
    assert!(sym.max_diff(&want) < 1e-14);
    assert!(oracle_err("q p q p") < 1e-10);
}

#[test]
fn number_operator_symbol() {
    // b†b/Ω with b = √(Ω/2)(q̂ + ip̂) and ħ = 1/Ω has symbol ½(p² + q²) − ħ/2.
    let i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(0.5, 0.0);
    let (q, p) = (PhasePolynomial::q(1, 1), PhasePolynomial::p(1, 1));
    let bd = &q - &p.scale(i);
    let b = &q + &p.scale(i);
    let s = bd.star(&b).unwrap().scale(half);
    let want = &(&(&p * &p) + &(&q * &q)).scale(half) - &PhasePolynomial::hbar(1).scale(half);
    assert!(s.max_diff(&want) < 1e-15);
    let (cl, m) = classical_limit(&s);
    assert_eq!(m, Some(1));
    assert_eq!(cl, (&(&p * &p) + &(&q * &q)).scale(half));
}

fn arb_word_1d() -> impl Strategy<Value = OperatorWord> {
    prop::collection::vec((prop::bool::ANY, 1u32..=2), 0..=4).prop_map(|fs| {
        let factors = fs
            .into_iter()
            .map(|(is_q, exp)| Generator {
                kind: if is_q { Kind::Position } else { Kind::Momentum },
                mode: 1,
                exp,
            })
            .collect();
        OperatorWord::new(factors).unwrap()
    })
}

fn arb_poly(dim: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = PhasePolynomial> {
    let mono = (prop::collection::vec(0u32..=max_deg, 2 * dim), 0u32..=1, -1.0f64..1.0, -1.0f64..1.0);
    prop::collection::vec(mono, 1..=max_terms).prop_map(move |ts| {
        let terms = ts.into_iter().map(|(mut e, k, re, im)| {
            while e.iter().sum::<u32>() > max_deg {
                let i = e.iter().position(|&x| x > 0).unwrap();
                e[i] -= 1;
            }
            let m = Monomial { p: e[..dim].to_vec(), q: e[dim..].to_vec(), hbar: k };
            (m, Complex64::new(re, im))
        });
        PhasePolynomial::from_terms(dim, terms)
    })
}

fn arb_classical(dim: usize) -> impl Strategy<Value = PhasePolynomial> {
    arb_poly(dim, 4, 5).prop_map(|f| classical_limit(&f).0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn words_match_truncated_matrices(w in arb_word_1d()) {
        let (q, p) = q_and_p();
        let sym = w.weyl_symbol().at_hbar(1.0);
        let err = block_rel_err(&word_matrix(&w, &q, &p), &quantize(&sym, &q, &p));
        prop_assert!(err < 1e-8, "word {w}: rel err {err}");
    }

    #[test]
    fn associativity_1d(f in arb_poly(1, 6, 4), g in arb_poly(1, 6, 4), h in arb_poly(1, 6, 4)) {
        let l = f.star(&g).unwrap().star(&h).unwrap();
        let r = f.star(&g.star(&h).unwrap()).unwrap();
        prop_assert!(l.max_diff(&r) <= 1e-10 * l.max_abs_coeff().max(1.0));
    }

    #[test]
    fn associativity_2d(f in arb_poly(2, 6, 4), g in arb_poly(2, 6, 4), h in arb_poly(2, 6, 4)) {
        let l = f.star(&g).unwrap().star(&h).unwrap();
        let r = f.star(&g.star(&h).unwrap()).unwrap();
        prop_assert!(l.max_diff(&r) <= 1e-10 * l.max_abs_coeff().max(1.0));
    }

    #[test]
    fn classical_limit_is_multiplicative(f in arb_poly(2, 4, 5), g in arb_poly(2, 4, 5)) {
        let lhs = classical_limit(&f.star(&g).unwrap()).0;
        let rhs = &classical_limit(&f).0 * &classical_limit(&g).0;
        prop_assert!(lhs.max_diff(&rhs) <= 1e-12 * rhs.max_abs_coeff().max(1.0));
    }

    #[test]
    fn commutator_is_i_poisson(f in arb_classical(2), g in arb_classical(2)) {
        let comm = &f.star(&g).unwrap() - &g.star(&f).unwrap();
        let want = f.poisson(&g).unwrap().scale(Complex64::new(0.0, 1.0));
        prop_assert!(comm.hbar_slice(1).max_diff(&want) <= 1e-12 * want.max_abs_coeff().max(1.0));
    }

    #[test]
    fn hermitian_words_have_graded_reality(w in arb_word_1d()) {
        // w·w† is self-adjoint for every word
        let mut factors = w.factors.clone();
        factors.extend(w.adjoint().factors);
        let h = OperatorWord::new(factors).unwrap();
        prop_assert!(h.is_self_adjoint());
        let s = h.weyl_symbol();
        for k in s.hbar_powers() {
            let slice = s.hbar_slice(k);
            let ok = if k % 2 == 0 {
                slice.terms().all(|(_, c)| c.im.abs() <= 1e-12 * c.norm().max(1.0))
            } else {
                slice.terms().all(|(_, c)| c.re.abs() <= 1e-12 * c.norm().max(1.0))
            };
            prop_assert!(ok, "k={k} slice {:?}", slice);
        }
    }

    #[test]
    fn text_round_trip(f in arb_poly(2, 6, 8)) {
        prop_assert_eq!(from_text(&to_text(&f)).unwrap(), f);
    }

    #[test]
    fn decomposition_reconstructs(w in arb_word_1d()) {
        let s = w.weyl_symbol();
        let mut acc = PhasePolynomial::zero(1);
        for (k, part) in w.weyl_order_decompose() {
            let mut hk = PhasePolynomial::one(1);
            for _ in 0..k {
                hk = &hk * &PhasePolynomial::hbar(1);
            }
            acc = &acc + &(&part * &hk);
        }
        prop_assert!(acc.max_diff(&s) == 0.0);
    }
}

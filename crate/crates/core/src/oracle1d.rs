//! Exact one-dimensional check of the matrix-element identity
//!
//! ```text
//! |O_ij|² = ∫dp dq dp' dq' J(p,q,p',q') W_i(p−p'/2, q−q'/2) W_j(p+p'/2, q+q'/2)
//! ```
//!
//! on harmonic-oscillator eigenstates sampled on a grid. For a polynomial
//! symbol, `J` is a finite sum of δ-function derivatives in `(p', q')`, so the
//! `(p', q')` integral collapses onto derivatives of the Wigner product at the
//! origin. These are taken spectrally.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jfunc::ConvolutionIntegrand;
use crate::par;
use crate::weylcalc::{Kind, OperatorWord, PhasePolynomial};

/// `n` points `min + k·(max − min)/n`, `k = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Grid {
    pub fn symmetric(half: f64, n: usize) -> Self {
        Grid { min: -half, max: half, n }
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.n as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        self.min + k as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.point(k)).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.max > self.min) || self.n < 2 {
            return Err(Error::Grid(format!("degenerate grid {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridWavefunction {
    pub grid: Grid,
    pub hbar: f64,
    pub values: Vec<Complex64>,
}

impl GridWavefunction {
    /// `∫|ψ|² dq` by the trapezoid rule.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &GridWavefunction) -> Complex64 {
        let h = self.grid.spacing();
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * h
    }
}

/// `W(p_a, q_b)` stored row-major by momentum: `values[a·nq + b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub q: Grid,
    pub p: Grid,
    pub hbar: f64,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn at(&self, ip: usize, iq: usize) -> f64 {
        self.values[ip * self.q.n + iq]
    }

    /// `∫W dp dq`.
    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.p.spacing() * self.q.spacing()
    }

    /// `∫W dp` at every q node.
    pub fn q_marginal(&self) -> Vec<f64> {
        let (nq, dp) = (self.q.n, self.p.spacing());
        (0..nq).map(|b| (0..self.p.n).map(|a| self.values[a * nq + b]).sum::<f64>() * dp).collect()
    }
}

/// All oscillator eigenfunctions `ψ_0 … ψ_nmax` (unit mass and frequency).
pub fn ho_eigenfunctions(nmax: usize, hbar: f64, grid: Grid) -> Result<Vec<GridWavefunction>> {
    grid.validate()?;
    if hbar <= 0.0 {
        return Err(Error::InvalidArgument("ħ must be positive".into()));
    }
    let turning = (hbar * (2 * nmax + 1) as f64).sqrt();
    if grid.max - grid.min < 8.0 * turning || grid.n < 256 {
        return Err(Error::Grid(format!(
            "grid [{}, {}] with {} points is too small for n={nmax}: need span ≥ {:.3} and at least 256 points",
            grid.min,
            grid.max,
            grid.n,
            8.0 * turning
        )));
    }
    let norm0 = (PI * hbar).powf(-0.25);
    let xs: Vec<f64> = grid.points().iter().map(|q| q / hbar.sqrt()).collect();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(nmax + 1);
    rows.push(xs.iter().map(|x| norm0 * (-0.5 * x * x).exp()).collect());
    for k in 0..nmax {
        let a = (2.0 / (k + 1) as f64).sqrt();
        let b = (k as f64 / (k + 1) as f64).sqrt();
        let next = (0..xs.len())
            .map(|i| a * xs[i] * rows[k][i] - if k > 0 { b * rows[k - 1][i] } else { 0.0 })
            .collect();
        rows.push(next);
    }
    Ok(rows
        .into_iter()
        .map(|r| GridWavefunction { grid, hbar, values: r.into_iter().map(|v| Complex64::new(v, 0.0)).collect() })
        .collect())
}

/// The normalized oscillator eigenfunction `ψ_n` on `grid`.
pub fn ho_eigenfunction(n: usize, hbar: f64, grid: Grid) -> Result<GridWavefunction> {
    Ok(ho_eigenfunctions(n, hbar, grid)?.pop().unwrap())
}

/// `W(p,q) = (2πħ)^{-1} ∫dr ψ*(q+r/2) ψ(q−r/2) e^{ipr/ħ}` with `r = 2mh` so both
/// arguments land on grid nodes.
pub fn wigner_transform(psi: &GridWavefunction, p_grid: Grid) -> Result<WignerGrid> {
    p_grid.validate()?;
    let (g, hbar) = (psi.grid, psi.hbar);
    let (nq, h) = (g.n, g.spacing());
    let np = p_grid.n;
    let ps = p_grid.points();
    let rows = par::map_range(np, |a| {
        let w = 2.0 * ps[a] * h / hbar;
        let phases: Vec<Complex64> = (0..nq).map(|m| Complex64::from_polar(1.0, w * m as f64)).collect();
        (0..nq)
            .map(|b| {
                let mmax = b.min(nq - 1 - b);
                let mut acc = (psi.values[b].conj() * psi.values[b]).re;
                for m in 1..=mmax {
                    let t = psi.values[b + m].conj() * psi.values[b - m] * phases[m];
                    acc += 2.0 * t.re;
                }
                acc * h / (PI * hbar)
            })
            .collect::<Vec<f64>>()
    });
    let w = WignerGrid { q: g, p: p_grid, hbar, values: rows.concat() };
    let marg = w.q_marginal();
    let mismatch: f64 = marg.iter().zip(&psi.values).map(|(m, v)| (m - v.norm_sqr()).abs()).sum::<f64>() * h;
    if mismatch > 1e-4 {
        return Err(Error::Grid(format!("Wigner marginal mismatch {mismatch:.3e}: momentum grid aliases")));
    }
    Ok(w)
}

struct Spectral {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    n: usize,
    spacing: f64,
}

impl Spectral {
    fn new(n: usize, spacing: f64) -> Self {
        let mut planner = FftPlanner::new();
        Spectral { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), n, spacing }
    }

    /// `d^order/dx^order` of periodic samples.
    fn derivative(&self, data: &mut [Complex64], order: u32) {
        if order == 0 {
            return;
        }
        let n = self.n;
        self.fwd.process(data);
        let base = 2.0 * PI / (n as f64 * self.spacing);
        for (k, v) in data.iter_mut().enumerate() {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            if n.is_multiple_of(2) && k == n / 2 && order % 2 == 1 {
                *v = Complex64::default();
                continue;
            }
            *v *= Complex64::new(0.0, base * kk).powu(order) / n as f64;
        }
        self.inv.process(data);
    }
}

fn apply_word(word: &OperatorWord, psi: &GridWavefunction) -> Vec<Complex64> {
    let g = psi.grid;
    let qs = g.points();
    let spec = Spectral::new(g.n, g.spacing());
    let mut v = psi.values.clone();
    for gen in word.factors.iter().rev() {
        for _ in 0..gen.exp {
            match gen.kind {
                Kind::Position => v.iter_mut().zip(&qs).for_each(|(x, q)| *x *= q),
                Kind::Momentum => {
                    spec.derivative(&mut v, 1);
                    v.iter_mut().for_each(|x| *x *= Complex64::new(0.0, -psi.hbar));
                }
            }
        }
    }
    v.iter_mut().for_each(|x| *x *= word.prefactor);
    v
}

/// Mixed spectral derivatives `∂_q^k ∂_p^l W`, cached.
struct Derivatives<'a> {
    w: &'a WignerGrid,
    sq: Spectral,
    sp: Spectral,
    cache: HashMap<(u32, u32), Vec<f64>>,
}

impl<'a> Derivatives<'a> {
    fn new(w: &'a WignerGrid) -> Self {
        Derivatives {
            w,
            sq: Spectral::new(w.q.n, w.q.spacing()),
            sp: Spectral::new(w.p.n, w.p.spacing()),
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, k: u32, l: u32) -> &[f64] {
        if !self.cache.contains_key(&(k, l)) {
            let (nq, np) = (self.w.q.n, self.w.p.n);
            let mut data: Vec<f64> = self.w.values.clone();
            if k > 0 {
                for a in 0..np {
                    let mut row: Vec<Complex64> =
                        data[a * nq..(a + 1) * nq].iter().map(|&x| Complex64::new(x, 0.0)).collect();
                    self.sq.derivative(&mut row, k);
                    for (d, r) in data[a * nq..(a + 1) * nq].iter_mut().zip(row) {
                        *d = r.re;
                    }
                }
            }
            if l > 0 {
                for b in 0..nq {
                    let mut col: Vec<Complex64> = (0..np).map(|a| Complex64::new(data[a * nq + b], 0.0)).collect();
                    self.sp.derivative(&mut col, l);
                    for (a, c) in col.into_iter().enumerate() {
                        data[a * nq + b] = c.re;
                    }
                }
            }
            self.cache.insert((k, l), data);
        }
        &self.cache[&(k, l)]
    }
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Coefficients `c_ab(p,q)` of `p̃^a q̃^b` in the convolution integrand.
fn integrand_blocks(o_w: &PhasePolynomial) -> Result<Vec<((u32, u32), PhasePolynomial)>> {
    let phi = ConvolutionIntegrand::new(o_w)?;
    let mut blocks: HashMap<(u32, u32), Vec<_>> = HashMap::new();
    for (m, c) in phi.symbolic().terms() {
        let key = (m.p[1], m.q[1]);
        let base = crate::weylcalc::Monomial { p: vec![m.p[0]], q: vec![m.q[0]], hbar: 0 };
        blocks.entry(key).or_default().push((base, *c));
    }
    let mut out: Vec<_> = blocks.into_iter().map(|(k, v)| (k, PhasePolynomial::from_terms(1, v))).collect();
    out.sort_by_key(|(k, _)| *k);
    Ok(out)
}

/// Grid choices for the identity check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Points per axis of the `(p, q)` grid.
    pub n: usize,
    /// Half-span of both axes in units of `√ħ`; `None` picks one from the
    /// highest level involved.
    pub half_span: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { n: 256, half_span: None }
    }
}

impl OracleConfig {
    fn grid(&self, nmax: usize, hbar: f64) -> Grid {
        let t = ((2 * nmax + 1) as f64).sqrt();
        let s = self.half_span.unwrap_or((4.0 * t).max(t + 7.0)).max(4.0 * t);
        Grid::symmetric(s * hbar.sqrt(), self.n)
    }
}

/// One identity evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub operator: String,
    pub i: usize,
    pub j: usize,
    pub hbar: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Imaginary part of the phase-space side; zero up to roundoff.
    pub rhs_imag: f64,
    pub rel_err: f64,
    pub grid_points: usize,
    pub half_span: f64,
}

/// Below this the matrix element counts as a selection-rule zero.
pub const ZERO_LHS: f64 = 1e-10;

impl IdentityCheck {
    /// Relative error below `tol`, or both sides below 1e-8 for a vanishing element.
    pub fn passes(&self, tol: f64) -> bool {
        if self.lhs > ZERO_LHS {
            self.rel_err < tol
        } else {
            self.rhs.abs() < 1e-8
        }
    }
}

struct Prepared {
    states: Vec<GridWavefunction>,
    wigner: Vec<WignerGrid>,
}

fn prepare(nmax: usize, hbar: f64, cfg: &OracleConfig) -> Result<Prepared> {
    let g = cfg.grid(nmax, hbar);
    let states = ho_eigenfunctions(nmax, hbar, g)?;
    let wigner = par::map_slice(&states, |s| wigner_transform(s, g)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Prepared { states, wigner })
}

fn check_pair(word: &OperatorWord, i: usize, j: usize, prep: &Prepared) -> Result<IdentityCheck> {
    let (si, sj) = (&prep.states[i], &prep.states[j]);
    let hbar = si.hbar;
    let lhs = si.inner(&GridWavefunction { values: apply_word(word, sj), ..sj.clone() }).norm_sqr();

    let o_w = word.weyl_symbol_in(1)?.at_hbar(hbar);
    let blocks = integrand_blocks(&o_w)?;
    let (wi, wj) = (&prep.wigner[i], &prep.wigner[j]);
    let (mut di, mut dj) = (Derivatives::new(wi), Derivatives::new(wj));
    let (qs, ps) = (wi.q.points(), wi.p.points());
    let (nq, np) = (wi.q.n, wi.p.n);
    let mut rhs = Complex64::default();
    for ((a, b), c) in &blocks {
        // ∂_{q'}^a ∂_{p'}^b [W_i(p−p'/2, q−q'/2) W_j(p+p'/2, q+q'/2)] at p'=q'=0
        let mut deriv = vec![0.0; nq * np];
        for k in 0..=*a {
            for l in 0..=*b {
                let w = binom(*a, k) * binom(*b, l) * (-0.5f64).powi((k + l) as i32) * 0.5f64.powi((a - k + b - l) as i32);
                let x = di.get(k, l).to_vec();
                let y = dj.get(a - k, b - l);
                for (d, (u, v)) in deriv.iter_mut().zip(x.iter().zip(y)) {
                    *d += w * u * v;
                }
            }
        }
        let pref = Complex64::new(0.0, -hbar).powu(a + b) * (2.0 * PI * hbar);
        let mut acc = Complex64::default();
        for ia in 0..np {
            for ib in 0..nq {
                let cv = c.evaluate(&[ps[ia], qs[ib]], hbar)?;
                acc += cv * deriv[ia * nq + ib];
            }
        }
        rhs += pref * acc;
    }
    rhs *= wi.p.spacing() * wi.q.spacing();
    let rel_err = if lhs > ZERO_LHS { (rhs.re - lhs).abs() / lhs } else { (rhs.re - lhs).abs() };
    Ok(IdentityCheck {
        operator: word.to_string(),
        i,
        j,
        hbar,
        lhs,
        rhs: rhs.re,
        rhs_imag: rhs.im,
        rel_err,
        grid_points: nq,
        half_span: wi.q.max,
    })
}

/// Both sides of the identity for `⟨i|O|j⟩`.
pub fn verify_identity(word: &OperatorWord, i: usize, j: usize, hbar: f64, cfg: &OracleConfig) -> Result<IdentityCheck> {
    if i == j {
        return Err(Error::InvalidArgument("the identity concerns off-diagonal elements (i ≠ j)".into()));
    }
    if word.min_dim() > 1 {
        return Err(Error::InvalidArgument(format!("operator {word} acts on more than one mode")));
    }
    check_pair(word, i, j, &prepare(i.max(j), hbar, cfg)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub config: OracleConfig,
    pub tolerance: f64,
    pub cases: Vec<IdentityCheck>,
    pub max_rel_err: f64,
    pub all_pass: bool,
}

/// Every ordered pair `i ≠ j ≤ nmax` for each operator and ħ.
pub fn run_suite(words: &[OperatorWord], nmax: usize, hbars: &[f64], cfg: &OracleConfig, tol: f64) -> Result<OracleReport> {
    let mut cases = Vec::new();
    for &hbar in hbars {
        let prep = prepare(nmax, hbar, cfg)?;
        let jobs: Vec<(usize, usize, usize)> = (0..words.len())
            .flat_map(|w| (0..=nmax).flat_map(move |i| (0..=nmax).filter(move |&j| j != i).map(move |j| (w, i, j))))
            .collect();
        let res = par::map_slice(&jobs, |&(w, i, j)| check_pair(&words[w], i, j, &prep));
        for r in res {
            cases.push(r?);
        }
    }
    let max_rel_err = cases.iter().filter(|c| c.lhs > ZERO_LHS).map(|c| c.rel_err).fold(0.0, f64::max);
    let all_pass = cases.iter().all(|c| c.passes(tol));
    Ok(OracleReport { config: cfg.clone(), tolerance: tol, cases, max_rel_err, all_pass })
}

/// The standard suite: `q̂, p̂, q̂², q̂p̂`, levels 0–6, ħ ∈ {1, 0.5}.
pub fn default_suite(cfg: &OracleConfig) -> Result<OracleReport> {
    let words: Vec<OperatorWord> = ["q", "p", "q^2", "q p"].iter().map(|w| w.parse().unwrap()).collect();
    run_suite(&words, 6, &[1.0, 0.5], cfg, 1e-3)
}

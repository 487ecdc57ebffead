//! Fock basis of the symmetric (collective) sector of the three-orbital LMG
//! model, realised with two bosonic modes, and dense matrices of the
//! `K_rs` generators.

use faer::Mat;

use crate::error::{Error, Result};

/// States `(n1, n2)` with `n1 + n2 <= Ω`, in ascending lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockBasis {
    omega: u32,
    states: Vec<(u32, u32)>,
}

impl FockBasis {
    pub fn new(omega: u32) -> Result<Self> {
        if omega == 0 {
            return Err(Error::InvalidArgument("particle number must be at least 1".into()));
        }
        let o = omega as u64;
        let dim = (o + 1)
            .checked_mul(o + 2)
            .map(|x| x / 2)
            .filter(|&d| d <= isize::MAX as u64 / 8)
            .ok_or_else(|| Error::InvalidArgument(format!("basis for Ω={omega} overflows")))?;
        let mut states = Vec::with_capacity(dim as usize);
        for n1 in 0..=omega {
            for n2 in 0..=(omega - n1) {
                states.push((n1, n2));
            }
        }
        Ok(FockBasis { omega, states })
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[(u32, u32)] {
        &self.states
    }

    pub fn state(&self, i: usize) -> (u32, u32) {
        self.states[i]
    }

    /// Row of `(n1, n2)`, or `None` outside the sector.
    pub fn index(&self, n1: u32, n2: u32) -> Option<usize> {
        if n1 + n2 > self.omega {
            return None;
        }
        let (o, a) = (self.omega as usize, n1 as usize);
        Some(a * (o + 1) - a * a.saturating_sub(1) / 2 + n2 as usize)
    }

    fn occupations(&self, s: (u32, u32)) -> [u32; 3] {
        [self.omega - s.0 - s.1, s.0, s.1]
    }

    /// Action of `K_rs` on a basis state: `Some((amplitude, target))` or `None`
    /// when the result vanishes.
    pub fn apply_k(&self, r: usize, s: usize, state: (u32, u32)) -> Result<Option<(f64, (u32, u32))>> {
        if r > 2 || s > 2 {
            return Err(Error::InvalidArgument(format!("orbital indices ({r},{s}) out of 0..=2")));
        }
        let mut n = self.occupations(state);
        if r == s {
            return Ok(if n[r] == 0 { None } else { Some((n[r] as f64, state)) });
        }
        if n[s] == 0 {
            return Ok(None);
        }
        let amp = (n[s] as f64).sqrt() * ((n[r] + 1) as f64).sqrt();
        n[s] -= 1;
        n[r] += 1;
        Ok(Some((amp, (n[1], n[2]))))
    }

    /// Apply `K_{r_1 s_1} K_{r_2 s_2} ...` (rightmost first).
    pub fn apply_word(&self, word: &[(usize, usize)], state: (u32, u32)) -> Result<Option<(f64, (u32, u32))>> {
        let mut amp = 1.0;
        let mut cur = state;
        for &(r, s) in word.iter().rev() {
            match self.apply_k(r, s, cur)? {
                Some((a, next)) => {
                    amp *= a;
                    cur = next;
                }
                None => return Ok(None),
            }
        }
        Ok(Some((amp, cur)))
    }

    /// Dense matrix of `K_rs`.
    pub fn matrix_k(&self, r: usize, s: usize) -> Result<Mat<f64>> {
        let d = self.dim();
        let mut m = Mat::<f64>::zeros(d, d);
        for (j, &st) in self.states.iter().enumerate() {
            if let Some((a, t)) = self.apply_k(r, s, st)? {
                let i = self.index(t.0, t.1).expect("K_rs preserves the sector");
                m[(i, j)] += a;
            }
        }
        Ok(m)
    }

    /// The observable `K_11/Ω`, diagonal with entries `n1/Ω`.
    pub fn matrix_observable_a(&self) -> HermitianMatrix {
        let d = self.dim();
        let om = self.omega as f64;
        let m = Mat::<f64>::from_fn(d, d, |i, j| if i == j { self.states[i].0 as f64 / om } else { 0.0 });
        HermitianMatrix(m)
    }
}

/// A real symmetric matrix whose symmetry has been verified.
#[derive(Clone, Debug)]
pub struct HermitianMatrix(Mat<f64>);

/// Relative asymmetry tolerance for [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

impl HermitianMatrix {
    /// Wrap `m` after checking `max|M − Mᵀ| < 1e-12 · max|M|`.
    pub fn new(m: Mat<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let n = m.nrows();
        let (mut asym, mut scale) = (0.0f64, 0.0f64);
        for j in 0..n {
            for i in 0..n {
                scale = scale.max(m[(i, j)].abs());
                asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        let tol = HERMITIAN_TOL * scale;
        if asym > tol {
            return Err(Error::NotHermitian { asymmetry: asym, tolerance: tol });
        }
        Ok(HermitianMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &Mat<f64> {
        &self.0
    }

    pub fn into_mat(self) -> Mat<f64> {
        self.0
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(Mat::<f64>::identity(n, n))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                s = s.max(self.0[(i, j)].abs());
            }
        }
        s
    }
}

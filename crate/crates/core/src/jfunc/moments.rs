//! Closed-form one-dimensional integrals of monomials against plane waves
//! and Gaussians over symmetric intervals.

use num_complex::Complex64;

/// `∫_{−L}^{L} xⁿ e^{−ikx} dx`.
///
/// Small `|k|L` uses the Taylor series of the exponential; otherwise the
/// integration-by-parts recursion runs upward from `n = 0`, which is stable
/// once `|k|L ≥ n`.
pub fn fourier_moment(n: u32, k: f64, l: f64) -> Complex64 {
    fourier_moments(n, k, l)[n as usize]
}

/// `[I_0, …, I_n]` with `I_m = ∫_{−L}^{L} x^m e^{−ikx} dx`.
pub fn fourier_moments(n: u32, k: f64, l: f64) -> Vec<Complex64> {
    let len = n as usize + 1;
    if l <= 0.0 {
        return vec![Complex64::default(); len];
    }
    let t = k.abs() * l;
    let mut out = Vec::with_capacity(len);
    if t < 2.0f64.max(n as f64) {
        for m in 0..=n {
            out.push(taylor_moment(m, k, l));
        }
        return out;
    }
    let (s, c) = (k * l).sin_cos();
    let e_minus = Complex64::new(c, -s); // e^{−ikL}
    let e_plus = Complex64::new(c, s);
    let ik = Complex64::new(0.0, k);
    out.push(Complex64::new(2.0 * s / k, 0.0));
    let mut lm = 1.0;
    for m in 1..=n {
        lm *= l;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let boundary = (e_minus * lm - e_plus * (sign * lm)) / (-ik);
        let prev = out[m as usize - 1];
        out.push(boundary + prev * (m as f64) / ik);
    }
    out
}

fn taylor_moment(n: u32, k: f64, l: f64) -> Complex64 {
    // Σ_m (−ik)^m/m! · 2L^{n+m+1}/(n+m+1) over n+m even.
    let mut acc = Complex64::default();
    let mut coef = Complex64::new(1.0, 0.0); // (−ik)^m/m!
    let mut lp = l.powi(n as i32 + 1);
    for m in 0..400u32 {
        if m > 0 {
            coef *= Complex64::new(0.0, -k) / m as f64;
            lp *= l;
        }
        if (n + m).is_multiple_of(2) {
            let term = coef * (2.0 * lp / (n + m + 1) as f64);
            acc += term;
            if m as f64 > k.abs() * l && term.norm() <= 1e-18 * acc.norm().max(f64::MIN_POSITIVE) {
                break;
            }
        }
    }
    acc
}

/// `[G_0, …, G_n]` with `G_m = ∫ x^m e^{−x²/(2σ²)} dx` over `[−L, L]`, or over
/// the real line when `l` is `None`.
pub fn gaussian_moments(n: u32, sigma: f64, l: Option<f64>) -> Vec<f64> {
    let len = n as usize + 1;
    let mut out = vec![0.0; len];
    let s2 = sigma * sigma;
    let root = (2.0 * std::f64::consts::PI).sqrt();
    match l {
        None => {
            out[0] = sigma * root;
            for m in (2..len).step_by(2) {
                out[m] = (m as f64 - 1.0) * s2 * out[m - 2];
            }
        }
        Some(l) => {
            if l <= 0.0 {
                return out;
            }
            let e = (-l * l / (2.0 * s2)).exp();
            out[0] = sigma * root * libm::erf(l / (sigma * std::f64::consts::SQRT_2));
            // G_m = −σ²[x^{m−1} e^{−x²/2σ²}]_{−L}^{L} + (m−1)σ² G_{m−2}
            for m in (2..len).step_by(2) {
                out[m] = -s2 * 2.0 * l.powi(m as i32 - 1) * e + (m as f64 - 1.0) * s2 * out[m - 2];
            }
        }
    }
    out
}

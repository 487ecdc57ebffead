//! Exact Weyl/Moyal calculus on polynomials in `(p, q)`.
//!
//! ħ is carried as a formal grading and only becomes a number in
//! [`PhasePolynomial::evaluate`] or [`PhasePolynomial::at_hbar`].
//! Phase points are laid out as `(p_1..p_d, q_1..q_d)`.

mod poly;
mod text;
mod word;

pub use poly::{classical_limit, Monomial, PhasePolynomial};
pub use text::{from_text, to_text};
pub use word::{Generator, Kind, OperatorWord};

/// Moyal product `f ⋆ g`.
pub fn star_product(f: &PhasePolynomial, g: &PhasePolynomial) -> crate::Result<PhasePolynomial> {
    f.star(g)
}

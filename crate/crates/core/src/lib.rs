//! Numerical toolkit for off-diagonal matrix elements of observables in
//! chaotic quantum systems, built around Weyl symbols.
//!
//! * [`weylcalc`]: exact Moyal/Weyl calculus on phase-space polynomials.
//! * [`basis`], [`lmg`]: the three-orbital Lipkin-Meshkov-Glick model.
//! * [`spectral`]: eigensolves, band profiles, widths and scaling fits.
//! * [`jfunc`]: the bilinear convolution kernel J and its ħ-free form.
//! * [`semiclassics`]: microcanonical sampling and bandwidth predictors.
//! * [`oracle1d`]: an exact one-dimensional check of the matrix-element identity.
//!
//! With the default `parallel` feature, batch work is spread over rayon's
//! global pool. Without it every routine runs sequentially and produces
//! identical results.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod jfunc;
pub mod lmg;
pub mod oracle1d;
pub mod par;
pub mod semiclassics;
pub mod spectral;
pub mod weylcalc;

pub use error::{Error, Result};
pub use num_complex::Complex64;

//! The matrix-element identity on oscillator eigenstates.

use ethweyl::oracle1d::{default_suite, verify_identity, OracleConfig};
use ethweyl::weylcalc::OperatorWord;

#[test]
fn suite_within_tolerance() {
    let report = default_suite(&OracleConfig::default()).unwrap();
    assert_eq!(report.cases.len(), 4 * 42 * 2);
    let worst = report.cases.iter().filter(|c| !c.passes(1e-3)).collect::<Vec<_>>();
    println!("max relative error {:.3e}", report.max_rel_err);
    assert!(worst.is_empty(), "{worst:#?}");
    for c in &report.cases {
        assert!(c.rhs_imag.abs() < 1e-8 * c.lhs.max(1.0), "{c:?}");
    }
}

#[test]
fn swap_symmetry() {
    let cfg = OracleConfig::default();
    for w in ["q", "p", "q^2", "q p"] {
        let w: OperatorWord = w.parse().unwrap();
        let a = verify_identity(&w, 1, 4, 0.5, &cfg).unwrap();
        let b = verify_identity(&w, 4, 1, 0.5, &cfg).unwrap();
        assert!((a.lhs - b.lhs).abs() < 1e-10 * a.lhs.max(1e-10));
        assert!((a.rhs - b.rhs).abs() < 1e-8 * a.rhs.abs().max(1e-8));
    }
}

#[test]
fn refinement_reduces_error() {
    // At this span 256 points alias in momentum and are rejected; beyond that
    // the error falls with every doubling.
    let w: OperatorWord = "q p".parse().unwrap();
    let err = |n: usize| verify_identity(&w, 2, 4, 1.0, &OracleConfig { n, half_span: Some(26.0) });
    assert!(err(256).is_err());
    let (mid, fine) = (err(512).unwrap().rel_err, err(1024).unwrap().rel_err);
    assert!(fine < mid, "{mid:e} -> {fine:e}");
    assert!(mid < 1e-3);
}

use approx::assert_relative_eq;
use yule_core::kernel::{dense_eigenvalues, explicit_eigenvalues};
use yule_core::*;

fn lambda_grid() -> impl Iterator<Item = f64> {
    (0..41).map(|j| -50.0 + 2.5 * j as f64)
}

#[test]
fn explicit_formula_matches_determinant_on_grid() {
    // exact roots sit on the grid (e.g. n = 20, λ = 40), so relative error
    // is measured against max(|d|, 1e-6)
    let mut worst = 0.0f64;
    for n in 2..=60 {
        for lambda in lambda_grid() {
            let a = dn_explicit(n, lambda).unwrap();
            let b = dn_oracle(n, lambda).unwrap();
            let rel = (a - b).abs() / b.abs().max(1e-6);
            assert!(rel <= 1e-9, "n = {n}, lambda = {lambda}: {a} vs {b}");
            worst = worst.max(rel);
        }
    }
    assert!(worst > 0.0);
}

#[test]
fn spectral_product_matches_explicit_formula() {
    for n in [2, 3, 7, 16, 40] {
        let ctx = KernelContext::with_mode(n, BuildMode::Spectral).unwrap();
        for lambda in lambda_grid() {
            let a = ctx.dn(lambda).unwrap();
            let b = dn_explicit(n, lambda).unwrap();
            assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0), "n = {n}, lambda = {lambda}");
        }
    }
}

#[test]
fn unit_value_at_origin() {
    for n in 2..=200 {
        assert_eq!(dn_explicit(n, 0.0).unwrap(), 1.0);
        assert_eq!(dn_neg(n, 0.0).unwrap(), 1.0);
    }
}

#[test]
fn three_point_walk_by_hand() {
    // det(I − K_3) with K_3 eigenvalues 1/3 and 1/9
    assert_relative_eq!(dn_explicit(3, 1.0).unwrap(), 16.0 / 27.0, max_relative = 1e-14);
}

#[test]
fn dense_and_closed_form_spectra_agree() {
    for n in [2, 5, 17, 64] {
        let a = explicit_eigenvalues(n).unwrap();
        let b = dense_eigenvalues(n).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, max_relative = 1e-10, epsilon = 1e-14);
        }
        let ctx = KernelContext::new(n).unwrap();
        let trace: f64 = ctx.eigenvalues().iter().sum();
        assert_relative_eq!(trace, ctx.exact_trace(), max_relative = 1e-12);
    }
}

#[test]
fn cache_round_trip_through_directory() {
    let dir = tempfile::tempdir().unwrap();
    let first = KernelContext::load_or_build(dir.path(), 12, BuildMode::ExplicitFormula).unwrap();
    assert!(dir.path().join(KernelContext::cache_file_name(12)).exists());
    let second = KernelContext::load_or_build(dir.path(), 12, BuildMode::ExplicitFormula).unwrap();
    assert_eq!(first.eigenvalues(), second.eigenvalues());
}

use yule_core::bounds::{envelope_tail_term, lemma_grid};
use yule_core::*;

#[test]
fn lower_bounds_hold_on_fine_grids() {
    let checks = check_dn_lower_bounds(&[11, 20, 50, 200], 1000).unwrap();
    assert!(checks.all_hold(), "{:?}", checks.violations);
    assert_eq!(checks.checks.len(), 12);
}

#[test]
fn lower_bound_grid_ends_at_boundary() {
    let g = lemma_grid(11, 1000);
    assert_eq!(g.len(), 1000);
    assert_eq!(g[0], 0.0);
    assert_eq!(*g.last().unwrap(), 60.5);
}

#[test]
fn lower_bounds_reject_short_walks() {
    assert!(check_dn_lower_bounds(&[10], 10).is_err());
}

#[test]
fn scanned_inverse_means_stay_under_envelope() {
    let r = compute_c4(120, 1e-8).unwrap();
    assert_eq!(r.scan.len(), 110);
    assert!(r.scanned_max <= r.c4);
    assert!((r.c4 - 1.0 - r.envelope_integral - envelope_tail_term(11)).abs() < 1e-12 * r.c4);
    assert!(compute_c4(10, 1e-8).is_err());
}

#[test]
fn report_is_consistent() {
    let cfg = BoundConfig {
        n_scan_max: 60,
        ..BoundConfig::default()
    };
    let r = compute_bounds(&cfg).unwrap();
    for c in [r.c1, r.c2, r.c3, r.c4, r.c5] {
        assert!(c.is_finite() && c > 0.0);
    }
    assert_eq!(r.c5, compute_c5(r.c1, r.c3, r.c4));
    assert!(r.lemma_checks.values().all(|&b| b), "{:?}", r.lemma_checks);
    let back: BoundReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
}

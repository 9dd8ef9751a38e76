use yule_core::montecarlo::{monte_carlo, oracle};
use yule_core::*;

#[test]
fn mean_square_correlation_matches_quadrature() {
    for n in [5, 50] {
        let cfg = SimConfig::new(n, 1, 1_000_000, 11);
        let out = monte_carlo(&cfg, |s| [s.theta_n * s.theta_n]).unwrap();
        let ctx = KernelContext::new(n).unwrap();
        let exact = moment(&MomentRequest::new(Target::Discrete(n), 2), Some(&ctx)).unwrap().value;
        let est = out.estimates[0];
        assert!(est.agrees_with(exact, 3.0, 0.0), "n = {n}: {est:?} vs {exact}");
    }
}

#[test]
fn laplace_transform_of_denominator() {
    let n = 20;
    let cfg = SimConfig::new(n, 1, 400_000, 12);
    let out = monte_carlo(&cfg, |s| [(-0.5 * s.b_n).exp(), (-2.0 * s.b_n).exp(), (-8.0 * s.b_n).exp()]).unwrap();
    let ctx = KernelContext::new(n).unwrap();
    for (est, s) in out.estimates.iter().zip([0.5, 2.0, 8.0]) {
        let exact = phi_bn(&ctx, s).unwrap();
        assert!(est.agrees_with(exact, 3.0, 0.0), "s = {s}: {est:?} vs {exact}");
    }
}

#[test]
fn denominator_mean() {
    let cfg = SimConfig::new(30, 1, 200_000, 13);
    let out = monte_carlo(&cfg, |s| [s.b_n, s.c_n]).unwrap();
    for est in out.estimates {
        assert!(est.agrees_with(oracle::mean_b_n(30), 3.0, 0.0), "{est:?}");
    }
}

#[test]
fn first_inverse_moment_of_limit_denominator() {
    let c1 = compute_cm(1, 1e-9).unwrap();
    // B̂ only sees the fine grid; N = 2000 keeps the discretisation bias near 1e-3
    let cfg = SimConfig::new(20, 100, 100_000, 14);
    let out = monte_carlo(&cfg, |s| [1.0 / s.b_hat]).unwrap();
    let est = out.estimates[0];
    assert!(est.agrees_with(c1, 3.0, 2e-3 * c1), "{est:?} vs {c1}");
}

#[test]
fn coupled_samples_stay_in_range() {
    let cfg = SimConfig::new(25, 8, 5000, 15);
    montecarlo::for_each_sample(&cfg, |_, s| {
        assert!(s.b_n > 0.0 && s.c_n > 0.0 && s.b_hat > 0.0 && s.c_hat > 0.0);
        assert!(s.theta_n.abs() <= 1.0);
        assert!(s.theta_hat.abs() <= 1.0 + 1e-6);
    })
    .unwrap();
}

#[test]
fn difference_variances_at_moderate_grid() {
    // small run: the full-size check lives in the acceptance target
    let n = 10;
    let cfg = SimConfig::new(n, 200, 20_000, 16);
    let d = estimate_difference_variances(&cfg).unwrap();
    let allowance = |v: f64| 2.0 / 200.0 * v;
    assert!(d.var_a.agrees_with(oracle::diff_a(n), 3.0, allowance(oracle::diff_a(n))), "{d:?}");
    assert!(d.var_b.agrees_with(oracle::diff_b(n), 3.0, allowance(oracle::diff_b(n))), "{d:?}");
    assert!(d.var_c.agrees_with(oracle::diff_b(n), 3.0, allowance(oracle::diff_b(n))), "{d:?}");
    assert!(d.second_moment_a_n.agrees_with(oracle::second_moment_a_n(n), 3.0, 0.0), "{d:?}");
}

#[test]
fn distance_shrinks_with_walk_length() {
    let short = estimate_l1_distance(&SimConfig::new(20, 20, 20_000, 17)).unwrap();
    let long = estimate_l1_distance(&SimConfig::new(200, 20, 20_000, 17)).unwrap();
    assert!(long.mean < short.mean);
}

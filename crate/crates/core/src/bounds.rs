//! Constants of the Wasserstein bound `d_W(θ_n, θ) ≤ C5/n` and numerical
//! checks of the lower bounds on `d_n(−2s/n)` behind them.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, YuleError};
use crate::kernel::{ln_dn_neg, KernelContext};
use crate::mgf::{phi_b, phi_bn};
use crate::moments::negative_moment;
use crate::quadrature::{integrate, Tolerance};

const LEMMA_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub n_scan_max: usize,
    pub rel_tol: f64,
    pub lemma_ns: Vec<usize>,
    pub lemma_points: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            n_scan_max: 500,
            rel_tol: 1e-9,
            lemma_ns: vec![11, 20, 50, 200],
            lemma_points: 1000,
        }
    }
}

/// `C_m = E[B^{−m}]`, `m ∈ {1, 2, 3}`.
pub fn compute_cm(m: usize, rel_tol: f64) -> Result<f64> {
    if !(1..=3).contains(&m) {
        return domain(format!("C_m is defined for m in 1..=3, got {m}"));
    }
    negative_moment(phi_b, m, rel_tol)
}

/// `E[B_n^{−1}]`.
pub fn inverse_mean_b_n(n: usize, rel_tol: f64) -> Result<f64> {
    let ctx = KernelContext::new(n)?;
    negative_moment(|s| phi_bn(&ctx, s), 1, rel_tol)
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `∫_1^∞ (2 sinh(√(s/2)) / √(10 s))^{−1/2} ds`, computed with `s = t²/2`.
pub fn envelope_integral(rel_tol: f64) -> f64 {
    let f = |t: f64| {
        let ln_rhs = std::f64::consts::LN_2 + ln_sinh(0.5 * t) - 0.5 * (5.0f64).ln() - t.ln();
        t * (-0.5 * ln_rhs).exp()
    };
    // the integrand decays like e^{−t/4}; e^{−200} is far below any tolerance
    integrate(f, std::f64::consts::SQRT_2, 800.0, Tolerance::new(1e-15, rel_tol), 5000).value
}

fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// `(1/3) binom(n, 11)^{−1/2} n^{5/2}`, the part of the envelope that
/// depends on `n`.
pub fn envelope_tail_term(n: usize) -> f64 {
    (2.5 * (n as f64).ln() - 0.5 * ln_binomial(n, 11)).exp() / 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C4Report {
    /// Certified value: the envelope at `n = 11`, its largest point.
    pub c4: f64,
    pub envelope_integral: f64,
    pub scanned_max: f64,
    pub scanned_argmax: usize,
    pub n_scan_max: usize,
    /// `(n, E[B_n^{−1}], envelope(n))` for every scanned `n`.
    pub scan: Vec<(usize, f64, f64)>,
}

/// Scans `E[B_n^{−1}]` for `11 ≤ n ≤ n_scan_max` and checks every value
/// against the analytic envelope `1 + I + (1/3) binom(n,11)^{−1/2} n^{5/2}`.
pub fn compute_c4(n_scan_max: usize, rel_tol: f64) -> Result<C4Report> {
    if n_scan_max < 11 {
        return domain(format!("n_scan_max must be at least 11, got {n_scan_max}"));
    }
    let integral = envelope_integral(rel_tol);
    let envelope = |n: usize| 1.0 + integral + envelope_tail_term(n);
    let c4 = envelope(11);
    let values: Vec<Result<(usize, f64, f64)>> = (11..=n_scan_max)
        .into_par_iter()
        .map(|n| Ok((n, inverse_mean_b_n(n, rel_tol)?, envelope(n))))
        .collect();
    let mut scan = Vec::with_capacity(values.len());
    for v in values {
        scan.push(v?);
    }
    for &(n, v, env) in &scan {
        if v > env || env > c4 {
            return Err(YuleError::Consistency(format!(
                "E[B_n^-1] = {v} at n = {n} is not dominated by the envelope {env} <= {c4}"
            )));
        }
    }
    let (scanned_argmax, scanned_max) = scan
        .iter()
        .fold((0, f64::NEG_INFINITY), |acc, &(n, v, _)| if v > acc.1 { (n, v) } else { acc });
    Ok(C4Report {
        c4,
        envelope_integral: integral,
        scanned_max,
        scanned_argmax,
        n_scan_max,
        scan,
    })
}

/// `C5 = (1/12){(1/132)√X + 2}√X + (1/6)√(5/2)·C1` with `X = (5/2)(C3 + C4)`.
pub fn compute_c5(c1: f64, c3: f64, c4: f64) -> f64 {
    let x = 2.5 * (c3 + c4);
    let r = x.sqrt();
    (r / 132.0 + 2.0) * r / 12.0 + 2.5f64.sqrt() * c1 / 6.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub clause: char,
    pub n: usize,
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LemmaChecks {
    /// Keys such as `"n=20 (b)"`.
    pub checks: BTreeMap<String, bool>,
    pub violations: Vec<LemmaViolation>,
}

impl LemmaChecks {
    pub fn all_hold(&self) -> bool {
        self.violations.is_empty() && self.checks.values().all(|&b| b)
    }
}

/// Evenly spaced grid on `[0, n²/2]`.
pub fn lemma_grid(n: usize, points: usize) -> Vec<f64> {
    let top = 0.5 * (n * n) as f64;
    let k = points.max(2) - 1;
    (0..=k).map(|i| top * i as f64 / k as f64).collect()
}

/// Checks, in log space, for `s` on the grid:
/// (a) `d_n(−2s/n) ≥ 1`;
/// (b) `d_n(−2s/n) ≥ 2⁵ binom(n,11) n^{−11} s⁵`;
/// (c) `d_n(−2s/n) ≥ 2 sinh(√(s/2)) / √(10s)` for `s ≤ n²/2`.
pub fn check_dn_lower_bounds(ns: &[usize], points: usize) -> Result<LemmaChecks> {
    let mut out = LemmaChecks::default();
    for &n in ns {
        if n < 11 {
            return domain(format!("the lower bounds are stated for n >= 11, got {n}"));
        }
        let nf = n as f64;
        let ln_coef = 5.0 * std::f64::consts::LN_2 + ln_binomial(n, 11) - 11.0 * nf.ln();
        let mut ok = [true; 3];
        for s in lemma_grid(n, points) {
            let lhs = ln_dn_neg(n, 2.0 * s / nf)?;
            let rhs_b = if s > 0.0 { ln_coef + 5.0 * s.ln() } else { f64::NEG_INFINITY };
            let rhs_c = if s > 0.0 {
                std::f64::consts::LN_2 + ln_sinh((0.5 * s).sqrt()) - 0.5 * (10.0 * s).ln()
            } else {
                // limit s → 0 of 2 sinh(√(s/2))/√(10 s) is 2/√20
                (2.0 / 20f64.sqrt()).ln()
            };
            for (i, (clause, rhs)) in [('a', 0.0), ('b', rhs_b), ('c', rhs_c)].into_iter().enumerate() {
                if lhs < rhs - LEMMA_SLACK {
                    ok[i] = false;
                    out.violations.push(LemmaViolation {
                        clause,
                        n,
                        s,
                        lhs: lhs.exp(),
                        rhs: rhs.exp(),
                    });
                }
            }
        }
        for (i, clause) in ['a', 'b', 'c'].into_iter().enumerate() {
            out.checks.insert(format!("n={n} ({clause})"), ok[i]);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c4_scanned_max: f64,
    pub c4_scanned_argmax: usize,
    pub envelope_integral: f64,
    pub n_scan_max: usize,
    pub config: BoundConfig,
    pub lemma_checks: BTreeMap<String, bool>,
}

/// Computes `C1..C5`, runs the lemma checks and the Cauchy–Schwarz
/// consistency checks `C1² ≤ C2`, `C2² ≤ C1 C3`.
pub fn compute_bounds(cfg: &BoundConfig) -> Result<BoundReport> {
    let c1 = compute_cm(1, cfg.rel_tol)?;
    let c2 = compute_cm(2, cfg.rel_tol)?;
    let c3 = compute_cm(3, cfg.rel_tol)?;
    let c4r = compute_c4(cfg.n_scan_max, cfg.rel_tol)?;
    let c5 = compute_c5(c1, c3, c4r.c4);
    let lemma = check_dn_lower_bounds(&cfg.lemma_ns, cfg.lemma_points)?;
    let mut checks = lemma.checks;
    checks.insert("C1^2 <= C2".into(), c1 * c1 <= c2);
    checks.insert("C2^2 <= C1*C3".into(), c2 * c2 <= c1 * c3);
    checks.insert("scan <= C4".into(), c4r.scanned_max <= c4r.c4);
    Ok(BoundReport {
        c1,
        c2,
        c3,
        c4: c4r.c4,
        c5,
        c4_scanned_max: c4r.scanned_max,
        c4_scanned_argmax: c4r.scanned_argmax,
        envelope_integral: c4r.envelope_integral,
        n_scan_max: cfg.n_scan_max,
        config: cfg.clone(),
        lemma_checks: checks,
    })
}

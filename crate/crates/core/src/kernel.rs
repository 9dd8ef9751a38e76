//! The discrete Brownian-bridge kernel `K_n` and its alternative
//! characteristic polynomial `d_n(λ) = det(I − λ K_n)`.
//!
//! `K_n` is the `(n−1)×(n−1)` matrix with entries `min(j,k)/n − jk/n²`. Its
//! inverse is `n·tridiag(−1, 2, −1)`, so the spectrum is known in closed
//! form, and `d_n(λ) = U_{n−1}(1 − λ/(2n)) / n` with `U` the Chebyshev
//! polynomial of the second kind. Three independent routes evaluate `d_n`:
//!
//! * [`dn_explicit`]: the finite-sum / two-power representation, evaluated
//!   in hyperbolic or trigonometric form away from the double root and as a
//!   positive binomial sum near it;
//! * [`dn_oracle`]: a pivoted LU determinant of the dense matrix;
//! * [`KernelContext::dn_spectral`]: the product `Π (1 − λ λ_j)` over the
//!   eigenvalues.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, YuleError};

/// Above this value of `n·θ` the two-power form is evaluated in log space.
const LOG_SPACE_THRESHOLD: f64 = 300.0;

/// Brownian-bridge covariance `M(s, t) = min(s, t) − s t`.
#[inline]
pub fn bridge_kernel(s: f64, t: f64) -> f64 {
    s.min(t) - s * t
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return domain(format!("walk length must be at least 2, got {n}"));
    }
    Ok(())
}

/// Dense `K_n`, entry `(j, k)` (1-based) equal to `min(j,k)/n − jk/n²`.
pub fn build_kernel_matrix(n: usize) -> Result<DMatrix<f64>> {
    check_n(n)?;
    let dim = n - 1;
    let nf = n as f64;
    Ok(DMatrix::from_fn(dim, dim, |r, c| {
        let (j, k) = ((r + 1) as f64, (c + 1) as f64);
        j.min(k) / nf - j * k / (nf * nf)
    }))
}

/// Closed-form spectrum of `K_n`, descending: `1 / (4n sin²(kπ/(2n)))`,
/// `k = 1..n−1`.
pub fn explicit_eigenvalues(n: usize) -> Result<Vec<f64>> {
    check_n(n)?;
    let nf = n as f64;
    Ok((1..n)
        .map(|k| {
            let s = (k as f64 * std::f64::consts::PI / (2.0 * nf)).sin();
            1.0 / (4.0 * nf * s * s)
        })
        .collect())
}

/// Spectrum of `K_n` from a dense symmetric eigen-decomposition
/// (Householder tridiagonalization followed by implicit QL/QR sweeps).
pub fn dense_eigenvalues(n: usize) -> Result<Vec<f64>> {
    let k = build_kernel_matrix(n)?;
    let eig = SymmetricEigen::try_new(k, f64::EPSILON, 100 * n).ok_or_else(|| {
        YuleError::Numeric {
            n,
            reason: "symmetric eigen-solver did not converge".into(),
        }
    })?;
    let mut indexed: Vec<(usize, f64)> = eig.eigenvalues.iter().copied().enumerate().collect();
    indexed.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let values: Vec<f64> = indexed.into_iter().map(|(_, v)| v).collect();
    if let Some(&min) = values.last() {
        if min <= 0.0 {
            return Err(YuleError::Numeric {
                n,
                reason: format!("non-positive eigenvalue {min:e}; K_n must be positive definite"),
            });
        }
    }
    Ok(values)
}

/// How a [`KernelContext`] obtains its spectrum and evaluates `d_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildMode {
    /// Closed-form eigenvalues; `d_n` via [`dn_explicit`].
    ExplicitFormula,
    /// Closed-form eigenvalues; `d_n` via the LU determinant [`dn_oracle`].
    DeterminantLu,
    /// Eigenvalues from the dense eigen-solver; `d_n` via the eigenvalue product.
    Spectral,
}

/// Per-`n` bundle: walk length, spectrum of `K_n` (descending) and the
/// backend used for `d_n`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelContext {
    n: usize,
    eigenvalues: Vec<f64>,
    build_mode: BuildMode,
}

/// On-disk cache record, `kernel_<n>.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct KernelRecord {
    n: usize,
    eigenvalues: Vec<f64>,
}

impl KernelContext {
    /// Context with the closed-form spectrum.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_mode(n, BuildMode::ExplicitFormula)
    }

    pub fn with_mode(n: usize, build_mode: BuildMode) -> Result<Self> {
        let eigenvalues = match build_mode {
            BuildMode::ExplicitFormula | BuildMode::DeterminantLu => explicit_eigenvalues(n)?,
            BuildMode::Spectral => dense_eigenvalues(n)?,
        };
        Ok(Self {
            n,
            eigenvalues,
            build_mode,
        })
    }

    /// Rebuilds a context from a stored spectrum, validating its shape and
    /// positivity.
    pub fn from_eigenvalues(n: usize, eigenvalues: Vec<f64>, build_mode: BuildMode) -> Result<Self> {
        check_n(n)?;
        if eigenvalues.len() != n - 1 {
            return domain(format!(
                "expected {} eigenvalues for n = {n}, got {}",
                n - 1,
                eigenvalues.len()
            ));
        }
        if eigenvalues.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return domain("eigenvalues must be finite and strictly positive");
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return domain("eigenvalues must be sorted in descending order");
        }
        Ok(Self {
            n,
            eigenvalues,
            build_mode,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n - 1
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn build_mode(&self) -> BuildMode {
        self.build_mode
    }

    /// `trace(K_n) = (n² − 1)/(6n)`.
    pub fn exact_trace(&self) -> f64 {
        let nf = self.n as f64;
        (nf * nf - 1.0) / (6.0 * nf)
    }

    /// `d_n(λ)` through the backend selected by the build mode.
    pub fn dn(&self, lambda: f64) -> Result<f64> {
        match self.build_mode {
            BuildMode::ExplicitFormula => dn_explicit(self.n, lambda),
            BuildMode::DeterminantLu => dn_oracle(self.n, lambda),
            BuildMode::Spectral => Ok(self.dn_spectral(lambda)),
        }
    }

    /// `Π_j (1 − λ λ_j)`.
    pub fn dn_spectral(&self, lambda: f64) -> f64 {
        self.eigenvalues.iter().map(|&l| 1.0 - lambda * l).product()
    }

    /// `ln d_n(−s)` for `s ≥ 0`. The closed form is used in every mode except
    /// `Spectral`, which sums `ln(1 + s λ_j)`.
    pub fn ln_dn_neg(&self, s: f64) -> Result<f64> {
        match self.build_mode {
            BuildMode::Spectral => {
                if s < 0.0 {
                    return domain(format!("expected s >= 0, got {s}"));
                }
                Ok(self.eigenvalues.iter().map(|&l| (s * l).ln_1p()).sum())
            }
            _ => ln_dn_neg(self.n, s),
        }
    }

    pub fn to_json(&self) -> String {
        let rec = KernelRecord {
            n: self.n,
            eigenvalues: self.eigenvalues.clone(),
        };
        serde_json::to_string(&rec).expect("kernel record serializes")
    }

    pub fn from_json(text: &str, build_mode: BuildMode) -> Result<Self> {
        let rec: KernelRecord = serde_json::from_str(text)
            .map_err(|e| YuleError::Domain(format!("malformed kernel record: {e}")))?;
        Self::from_eigenvalues(rec.n, rec.eigenvalues, build_mode)
    }

    /// `kernel_<n>.json`
    pub fn cache_file_name(n: usize) -> String {
        format!("kernel_{n}.json")
    }

    /// Loads `kernel_<n>.json` from `dir` when present and valid, otherwise
    /// builds the context and writes the cache file.
    pub fn load_or_build(dir: &Path, n: usize, build_mode: BuildMode) -> Result<Self> {
        let path: PathBuf = dir.join(Self::cache_file_name(n));
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(ctx) = Self::from_json(&text, build_mode) {
                if ctx.n == n {
                    return Ok(ctx);
                }
            }
        }
        let ctx = Self::with_mode(n, build_mode)?;
        // A cache that cannot be written is not an error for the computation.
        if fs::create_dir_all(dir).is_ok() {
            let _ = fs::write(&path, ctx.to_json());
        }
        Ok(ctx)
    }
}

/// `eigen_spectrum`: the descending spectrum cached in the context.
pub fn eigen_spectrum(ctx: &KernelContext) -> &[f64] {
    ctx.eigenvalues()
}

/// `det(I − λ K_n)` by pivoted LU factorization.
pub fn dn_oracle(n: usize, lambda: f64) -> Result<f64> {
    let k = build_kernel_matrix(n)?;
    let dim = n - 1;
    let a = DMatrix::<f64>::identity(dim, dim) - k * lambda;
    let det = a.lu().determinant();
    if !det.is_finite() {
        return Err(YuleError::Numeric {
            n,
            reason: format!("determinant overflow at lambda = {lambda}"),
        });
    }
    Ok(det)
}

/// Binomial-sum representation, valid when `n²|δ| < 1`:
/// `d_n = (1/n) Σ_k C(n, 2k−1) y^{n−2k+1} δ^{k−1}`, with `y = 1 − h`,
/// `h = λ/(2n)` and `δ = y² − 1`. Returns `(d_n − 1, d_n')`, the derivative
/// being with respect to `λ`; `d_n − 1` is kept separate so that its
/// logarithm stays accurate near `λ = 0`.
fn binomial_branch(n: usize, h: f64, delta: f64) -> (f64, f64) {
    let nf = n as f64;
    let y = 1.0 - h;
    let kmax = n.div_ceil(2);
    let ratio_base = delta / (y * y);
    // T_k = C(n,2k-1) y^{n-2k+1} δ^{k-1};  U_k = C(n,2k-1) y^{n-2k+2} δ^{k-2}.
    let mut t = nf * y.powi((n - 1) as i32);
    let mut rest = 0.0;
    let mut slope_a = 0.0;
    let mut slope_b = 0.0;
    let mut u = 0.0;
    for k in 1..=kmax {
        let p = (n + 1 - 2 * k) as f64;
        if k >= 2 {
            rest += t;
            slope_b += (k - 1) as f64 * u;
        }
        slope_a += 0.5 * p * t / y;
        if k == kmax {
            break;
        }
        // C(n,2k+1)/C(n,2k-1)
        let binom_ratio = (p * (p - 1.0)) / ((2 * k) as f64 * (2 * k + 1) as f64);
        if k == 1 {
            u = nf * (nf - 1.0) * (nf - 2.0) / 6.0 * y.powi((n - 2) as i32);
        } else {
            u *= binom_ratio * ratio_base;
        }
        t *= binom_ratio * ratio_base;
        if k >= 2 && t.abs() <= 1e-18 * rest.abs() && u.abs() * (k as f64) <= 1e-18 * slope_b.abs() {
            break;
        }
    }
    // first term y^{n−1} − 1
    let lead = if h.abs() < 0.5 {
        ((nf - 1.0) * (-h).ln_1p()).exp_m1()
    } else {
        y.powi((n - 1) as i32) - 1.0
    };
    (lead + rest / nf, -(slope_a + slope_b) / (nf * nf))
}

#[inline]
fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// `d_n(λ)` from the finite-sum representation, exact on the whole real line.
pub fn dn_explicit(n: usize, lambda: f64) -> Result<f64> {
    check_n(n)?;
    if lambda.is_nan() {
        return domain("lambda is NaN");
    }
    let nf = n as f64;
    let h = lambda / (2.0 * nf);
    let y = 1.0 - h;
    let delta = h * (h - 2.0);
    if nf * nf * delta.abs() < 1.0 {
        return Ok(1.0 + binomial_branch(n, h, delta).0);
    }
    if delta > 0.0 {
        // Real roots f, 1/f: f^n − f^{−n} = 2 sinh(nθ).
        let theta = delta.sqrt().asinh();
        let x = nf * theta;
        let magnitude = if x > LOG_SPACE_THRESHOLD {
            (ln_sinh(x) - nf.ln() - 0.5 * delta.ln()).exp()
        } else {
            x.sinh() / (nf * delta.sqrt())
        };
        let sign = if y < 0.0 && n % 2 == 0 { -1.0 } else { 1.0 };
        return Ok(sign * magnitude);
    }
    // Complex-conjugate roots on the unit circle.
    let sin_theta = (-delta).sqrt();
    if y >= 0.0 {
        let theta = 2.0 * (0.5 * h).sqrt().asin();
        Ok((nf * theta).sin() / (nf * sin_theta))
    } else {
        let phi = 2.0 * (0.5 * (2.0 - h)).sqrt().asin();
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        Ok(sign * (nf * phi).sin() / (nf * sin_theta))
    }
}

/// Hyperbolic parametrisation of `d_n(−s)`: `y = 1 + s/(2n) = cosh θ`.
struct NegArgument {
    n: f64,
    delta: f64,
    theta: f64,
    poly: Option<(f64, f64)>,
}

fn neg_argument(n: usize, s: f64) -> Result<NegArgument> {
    check_n(n)?;
    if !(s >= 0.0) {
        return domain(format!("expected s >= 0, got {s}"));
    }
    let nf = n as f64;
    let e = s / (2.0 * nf);
    let delta = e * (2.0 + e);
    let poly = if nf * nf * delta < 1.0 {
        Some(binomial_branch(n, -e, delta))
    } else {
        None
    };
    Ok(NegArgument {
        n: nf,
        delta,
        theta: delta.sqrt().asinh(),
        poly,
    })
}

/// `d_n(−s)` for `s ≥ 0`. Overflows to `+∞` for very large `n·s`; use
/// [`ln_dn_neg`] there.
pub fn dn_neg(n: usize, s: f64) -> Result<f64> {
    let a = neg_argument(n, s)?;
    if let Some((excess, _)) = a.poly {
        return Ok(1.0 + excess);
    }
    let x = a.n * a.theta;
    if x > LOG_SPACE_THRESHOLD {
        Ok((ln_sinh(x) - a.n.ln() - 0.5 * a.delta.ln()).exp())
    } else {
        Ok(x.sinh() / (a.n * a.delta.sqrt()))
    }
}

/// `ln d_n(−s)` for `s ≥ 0`.
pub fn ln_dn_neg(n: usize, s: f64) -> Result<f64> {
    let a = neg_argument(n, s)?;
    if let Some((excess, _)) = a.poly {
        return Ok(excess.ln_1p());
    }
    Ok(ln_sinh(a.n * a.theta) - a.n.ln() - 0.5 * a.delta.ln())
}

/// `d_n'(−s)`, the derivative of `d_n` evaluated at `−s`, for `s ≥ 0`.
pub fn dn_neg_prime(n: usize, s: f64) -> Result<f64> {
    let a = neg_argument(n, s)?;
    if let Some((_, d)) = a.poly {
        return Ok(d);
    }
    let x = a.n * a.theta;
    let sh = a.delta.sqrt();
    let ch = (1.0 + a.delta).sqrt();
    let em = (-2.0 * x).exp();
    let bracket = a.n * (1.0 + em) * sh - (1.0 - em) * ch;
    // −e^{x}·bracket / (4 n² sinh³θ), assembled in log space.
    let ln_mag = x + bracket.ln() - (4.0 * a.n * a.n).ln() - 3.0 * sh.ln();
    Ok(-ln_mag.exp())
}

/// `d_n'(−s) / d_n(−s)` for `s ≥ 0`; spectrally `−Σ_j λ_j / (1 + s λ_j)`.
pub fn dn_neg_log_derivative(n: usize, s: f64) -> Result<f64> {
    let a = neg_argument(n, s)?;
    if let Some((excess, d)) = a.poly {
        return Ok(d / (1.0 + excess));
    }
    let x = a.n * a.theta;
    let sh = a.delta.sqrt();
    let ch = (1.0 + a.delta).sqrt();
    let em = (-2.0 * x).exp();
    let bracket = a.n * (1.0 + em) * sh - (1.0 - em) * ch;
    Ok(-bracket / (2.0 * a.n * a.delta * (-(-2.0 * x).exp_m1())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_matrix_small_cases() {
        let k2 = build_kernel_matrix(2).unwrap();
        assert_eq!(k2.shape(), (1, 1));
        assert_relative_eq!(k2[(0, 0)], 0.25);

        let k3 = build_kernel_matrix(3).unwrap();
        assert_relative_eq!(k3[(0, 0)], 2.0 / 9.0, epsilon = 1e-16);
        assert_relative_eq!(k3[(0, 1)], 1.0 / 9.0, epsilon = 1e-16);
        assert_relative_eq!(k3[(1, 0)], 1.0 / 9.0, epsilon = 1e-16);
        assert_relative_eq!(k3[(1, 1)], 2.0 / 9.0, epsilon = 1e-16);

        let k4 = build_kernel_matrix(4).unwrap();
        assert_relative_eq!(k4[(1, 2)], 0.125, epsilon = 1e-16);
        assert_eq!(k4, k4.transpose());
    }

    #[test]
    fn rejects_short_walks() {
        assert!(matches!(build_kernel_matrix(1), Err(YuleError::Domain(_))));
        assert!(matches!(KernelContext::new(0), Err(YuleError::Domain(_))));
        assert!(dn_explicit(1, 0.3).is_err());
        assert!(dn_neg(5, -1.0).is_err());
    }

    #[test]
    fn small_spectra() {
        let e2 = explicit_eigenvalues(2).unwrap();
        assert_relative_eq!(e2[0], 0.25, epsilon = 1e-15);
        let e3 = explicit_eigenvalues(3).unwrap();
        assert_relative_eq!(e3[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(e3[1], 1.0 / 9.0, epsilon = 1e-15);
        let d3 = dense_eigenvalues(3).unwrap();
        assert_relative_eq!(d3[0], 1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(d3[1], 1.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn dense_solver_matches_closed_form() {
        for n in [2usize, 5, 17, 64, 150] {
            let dense = dense_eigenvalues(n).unwrap();
            let exact = explicit_eigenvalues(n).unwrap();
            for (a, b) in dense.iter().zip(&exact) {
                assert_relative_eq!(a, b, max_relative = 1e-11, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn largest_eigenvalue_scaled_by_n_near_inverse_pi_squared() {
        let ctx = KernelContext::with_mode(50, BuildMode::Spectral).unwrap();
        let top = ctx.eigenvalues()[0] / 50.0;
        let target = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!((top - target).abs() / target < 0.01, "{top} vs {target}");
    }

    #[test]
    fn dn_hand_values() {
        for lambda in [-3.0, 0.0, 0.7, 4.0, 11.0] {
            assert_relative_eq!(dn_explicit(2, lambda).unwrap(), 1.0 - lambda / 4.0, epsilon = 1e-14);
        }
        assert_relative_eq!(dn_explicit(3, 1.0).unwrap(), 16.0 / 27.0, epsilon = 1e-15);
        assert_relative_eq!(dn_oracle(3, 1.0).unwrap(), 16.0 / 27.0, epsilon = 1e-15);
        assert_eq!(dn_explicit(17, 0.0).unwrap(), 1.0);
        assert_relative_eq!(dn_oracle(5, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            dn_oracle(6, 2.5).unwrap(),
            dn_explicit(6, 2.5).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn dn_neg_values_and_slope_at_origin() {
        assert_relative_eq!(dn_neg(2, 2.0).unwrap(), 1.5, epsilon = 1e-15);
        for n in [2usize, 3, 10, 101, 4000] {
            assert_eq!(dn_neg(n, 0.0).unwrap(), 1.0);
            let nf = n as f64;
            assert_relative_eq!(
                dn_neg_prime(n, 0.0).unwrap(),
                -(nf * nf - 1.0) / (6.0 * nf),
                max_relative = 1e-13
            );
        }
        let ctx = KernelContext::new(10).unwrap();
        let spectral: f64 = ctx.eigenvalues().iter().map(|l| 1.0 + 7.0 * l).product();
        assert_relative_eq!(dn_neg(10, 7.0).unwrap(), spectral, max_relative = 1e-10);
    }

    #[test]
    fn derivative_matches_spectral_sum_across_branch_switch() {
        for n in [2usize, 3, 7, 40, 333] {
            let ctx = KernelContext::new(n).unwrap();
            let nf = n as f64;
            // s such that n²δ crosses 1 near s ≈ 1/n
            for s in [0.0, 1e-9, 0.1 / nf, 0.5 / nf, 0.99 / nf, 1.01 / nf, 2.0 / nf, 0.3, 5.0, 80.0] {
                let d: f64 = ctx.eigenvalues().iter().map(|l| 1.0 + s * l).product();
                let g: f64 = -ctx.eigenvalues().iter().map(|l| l / (1.0 + s * l)).sum::<f64>();
                assert_relative_eq!(dn_neg(n, s).unwrap(), d, max_relative = 1e-12);
                assert_relative_eq!(dn_neg_prime(n, s).unwrap(), g * d, max_relative = 1e-11);
                assert_relative_eq!(dn_neg_log_derivative(n, s).unwrap(), g, max_relative = 1e-11);
                let ln_d: f64 = ctx.eigenvalues().iter().map(|l| (s * l).ln_1p()).sum();
                assert_relative_eq!(ln_dn_neg(n, s).unwrap(), ln_d, max_relative = 1e-12, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn log_space_for_large_arguments() {
        // n θ well past the overflow of sinh
        let n = 20_000;
        let s = 4.0e4;
        let ln = ln_dn_neg(n, s).unwrap();
        let ctx = KernelContext::new(n).unwrap();
        let spectral: f64 = ctx.eigenvalues().iter().map(|l| (s * l).ln_1p()).sum();
        assert_relative_eq!(ln, spectral, max_relative = 1e-11);
        assert!(dn_neg(n, 1.0).unwrap().is_finite());
        assert_eq!(dn_neg(n, 1e3).unwrap(), f64::INFINITY);
        let g = dn_neg_log_derivative(n, s).unwrap();
        let gs: f64 = -ctx.eigenvalues().iter().map(|l| l / (1.0 + s * l)).sum::<f64>();
        assert_relative_eq!(g, gs, max_relative = 1e-10);
    }

    #[test]
    fn trace_identity() {
        for n in 2..=200 {
            let ctx = KernelContext::new(n).unwrap();
            let sum: f64 = ctx.eigenvalues().iter().sum();
            assert_relative_eq!(sum, ctx.exact_trace(), max_relative = 1e-12);
        }
    }

    #[test]
    fn json_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = KernelContext::load_or_build(dir.path(), 12, BuildMode::ExplicitFormula).unwrap();
        assert!(dir.path().join("kernel_12.json").exists());
        let again = KernelContext::load_or_build(dir.path(), 12, BuildMode::ExplicitFormula).unwrap();
        assert_eq!(ctx, again);
        let bad = KernelContext::from_json(r#"{"n":4,"eigenvalues":[0.1,0.2,0.3]}"#, BuildMode::ExplicitFormula);
        assert!(bad.is_err());
    }
}

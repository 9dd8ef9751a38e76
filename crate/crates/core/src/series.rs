//! Truncated power series in one variable and the `s12`-derivatives of the
//! joint mgf at `s12 = 0`.
//!
//! The mgf depends on `s12` only through `u = s12²`, and
//! `D(u) = Π_j (c_j − λ_j² u)` with `c_j = (1 + s11 λ_j)(1 + s22 λ_j)` is a
//! polynomial in `u`. Writing `D^{−1/2} = Σ_p a_p u^p`, the `m`-th
//! derivative in `s12` at zero is `m!·a_{m/2}` for even `m`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kernel::KernelContext;

/// Taylor polynomial `Σ_{p=0}^{P} c_p u^p`; arithmetic drops terms above `u^P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    /// Builds a series of the given order, padding with zeros or dropping
    /// surplus coefficients.
    pub fn new(mut coeffs: Vec<f64>, order: usize) -> Self {
        coeffs.resize(order + 1, 0.0);
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn constant(c: f64, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, p: usize) -> f64 {
        self.coeffs.get(p).copied().unwrap_or(0.0)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }
}

fn same_order(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<usize> {
    if a.order() != b.order() {
        return domain(format!("series orders differ: {} vs {}", a.order(), b.order()));
    }
    Ok(a.order())
}

pub fn series_add(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
    same_order(a, b)?;
    Ok(TruncatedSeries {
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
    })
}

pub fn series_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
    let order = same_order(a, b)?;
    let mut out = vec![0.0; order + 1];
    for (i, &x) in a.coeffs.iter().enumerate() {
        for (j, &y) in b.coeffs[..=order - i].iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    Ok(TruncatedSeries { coeffs: out })
}

/// `exp(a)` via `k b_k = Σ_{j=1}^{k} j a_j b_{k−j}`.
pub fn series_exp(a: &TruncatedSeries) -> TruncatedSeries {
    let order = a.order();
    let mut b = vec![0.0; order + 1];
    b[0] = a.coeffs[0].exp();
    for k in 1..=order {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += j as f64 * a.coeffs[j] * b[k - j];
        }
        b[k] = acc / k as f64;
    }
    TruncatedSeries { coeffs: b }
}

/// `log(a)`; requires a positive constant term.
pub fn series_log(a: &TruncatedSeries) -> Result<TruncatedSeries> {
    let a0 = a.coeffs[0];
    if !(a0 > 0.0) {
        return domain(format!("log of a series needs a positive constant term, got {a0}"));
    }
    let order = a.order();
    let mut c = vec![0.0; order + 1];
    c[0] = a0.ln();
    for k in 1..=order {
        let mut acc = 0.0;
        for j in 1..k {
            acc += j as f64 * c[j] * a.coeffs[k - j];
        }
        c[k] = (a.coeffs[k] - acc / k as f64) / a0;
    }
    Ok(TruncatedSeries { coeffs: c })
}

/// `a^{−1/2} = exp(−½ log a)`.
pub fn series_powneghalf(a: &TruncatedSeries) -> Result<TruncatedSeries> {
    Ok(series_exp(&series_log(a)?.scale(-0.5)))
}

/// Power sums `S_p = Σ_j r_j^p`, `p = 1..=out.len()`, of `r_j = λ_j²/c_j`,
/// together with `Σ_j ln c_j`.
pub(crate) fn spectral_sums(eigenvalues: &[f64], s11: f64, s22: f64, out: &mut [f64]) -> f64 {
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut log_c = 0.0;
    for &l in eigenvalues {
        let a = s11 * l;
        let b = s22 * l;
        log_c += a.ln_1p() + b.ln_1p();
        let r = l * l / ((1.0 + a) * (1.0 + b));
        let mut rp = r;
        for v in out.iter_mut() {
            *v += rp;
            rp *= r;
        }
    }
    log_c
}

/// Series of `log D(u)` to order `P` from power sums: constant `Σ ln c_j`,
/// coefficient `p` equal to `−S_p / p`.
pub fn log_d_from_sums(log_c: f64, power_sums: &[f64]) -> TruncatedSeries {
    let mut coeffs = Vec::with_capacity(power_sums.len() + 1);
    coeffs.push(log_c);
    coeffs.extend(power_sums.iter().enumerate().map(|(i, s)| -s / (i + 1) as f64));
    TruncatedSeries { coeffs }
}

pub fn log_d_series(ctx: &KernelContext, s11: f64, s22: f64, order: usize) -> Result<TruncatedSeries> {
    if !(s11 >= 0.0 && s22 >= 0.0) {
        return domain(format!("s11 and s22 must be non-negative, got ({s11}, {s22})"));
    }
    let mut sums = vec![0.0; order];
    let log_c = spectral_sums(ctx.eigenvalues(), s11, s22, &mut sums);
    Ok(log_d_from_sums(log_c, &sums))
}

/// Coefficient `a_q` of `u^q` in `D(u)^{−1/2}`, from `Σ ln c_j` and the
/// power sums `S_1..S_q`. Every term of the recursion is non-negative.
pub(crate) fn neg_half_coeff(log_c: f64, power_sums: &[f64], q: usize) -> f64 {
    debug_assert!(power_sums.len() >= q);
    let a0 = (-0.5 * log_c).exp();
    if q == 0 {
        return a0;
    }
    // exp of Σ_p (S_p / (2p)) u^p
    let mut b = [0.0f64; 33];
    let mut bv: Vec<f64>;
    let b: &mut [f64] = if q < b.len() {
        &mut b[..=q]
    } else {
        bv = vec![0.0; q + 1];
        &mut bv
    };
    b[0] = a0;
    for k in 1..=q {
        let mut acc = 0.0;
        for j in 1..=k {
            // j · l_j with l_j = S_j / (2j)
            acc += 0.5 * power_sums[j - 1] * b[k - j];
        }
        b[k] = acc / k as f64;
    }
    b[q]
}

/// Multiplies `a_q` by `m!`.
pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// `∂^m φ_n / ∂s12^m` at `(s11, 0, s22)`. Odd orders are exactly zero.
pub fn dphi_ds12_at_zero(ctx: &KernelContext, s11: f64, s22: f64, m: usize) -> Result<f64> {
    if m % 2 == 1 {
        return Ok(0.0);
    }
    if !(s11 >= 0.0 && s22 >= 0.0) {
        return domain(format!("s11 and s22 must be non-negative, got ({s11}, {s22})"));
    }
    let q = m / 2;
    let mut sums = vec![0.0; q];
    let log_c = spectral_sums(ctx.eigenvalues(), s11, s22, &mut sums);
    Ok(factorial(m) * neg_half_coeff(log_c, &sums, q))
}

/// The full series `D(u)^{−1/2}` at `(s11, s22)`, order `P`.
pub fn phi_series(ctx: &KernelContext, s11: f64, s22: f64, order: usize) -> Result<TruncatedSeries> {
    let log_d = log_d_series(ctx, s11, s22, order)?;
    Ok(series_exp(&log_d.scale(-0.5)))
}

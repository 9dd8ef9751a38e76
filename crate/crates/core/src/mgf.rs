//! Moment generating functions of the quadratic forms `(Z11, Z12, Z22)` and of
//! the denominators `B_n`, `B`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kernel::KernelContext;

/// Argument of the joint mgf. Valid when `s11, s22 ≥ 0` and `s12² ≤ s11·s22`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgfPoint {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

impl MgfPoint {
    pub fn new(s11: f64, s12: f64, s22: f64) -> Result<Self> {
        let p = Self { s11, s12, s22 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { s11, s12, s22 } = *self;
        if !(s11.is_finite() && s12.is_finite() && s22.is_finite()) {
            return domain("mgf arguments must be finite");
        }
        if s11 < 0.0 || s22 < 0.0 {
            return domain(format!("s11 and s22 must be non-negative, got ({s11}, {s22})"));
        }
        // a relative slack of a few ulps so that points on the boundary pass
        if s12 * s12 > s11 * s22 * (1.0 + 4.0 * f64::EPSILON) {
            return domain(format!("s12^2 = {} exceeds s11*s22 = {}", s12 * s12, s11 * s22));
        }
        Ok(())
    }
}

/// Roots of `z² + (s11+s22) z + (s11 s22 − s12²)`, `alpha ≤ beta ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
}

pub fn alpha_beta(p: &MgfPoint) -> Result<AlphaBeta> {
    p.validate()?;
    let sum = p.s11 + p.s22;
    let disc = ((p.s11 - p.s22).powi(2) + 4.0 * p.s12 * p.s12).sqrt();
    let alpha = -0.5 * (sum + disc);
    // β from the product of the roots, which avoids cancellation in sum − disc
    let prod = (p.s11 * p.s22 - p.s12 * p.s12).max(0.0);
    let beta = if sum + disc > 0.0 { -2.0 * prod / (sum + disc) } else { 0.0 };
    Ok(AlphaBeta { alpha, beta })
}

/// `φ_n(s11, s12, s22) = (d_n(α) d_n(β))^{−1/2}`.
pub fn phi_n(ctx: &KernelContext, p: &MgfPoint) -> Result<f64> {
    let ab = alpha_beta(p)?;
    let ln = ctx.ln_dn_neg(-ab.alpha)? + ctx.ln_dn_neg(-ab.beta)?;
    Ok((-0.5 * ln).exp())
}

/// `Π_j (1 + (s11+s22)λ_j + (s11 s22 − s12²)λ_j²)^{−1/2}` over the spectrum.
pub fn phi_n_spectral(ctx: &KernelContext, p: &MgfPoint) -> Result<f64> {
    p.validate()?;
    let a = p.s11 + p.s22;
    let b = p.s11 * p.s22 - p.s12 * p.s12;
    let ln: f64 = ctx
        .eigenvalues()
        .iter()
        .map(|&l| (a * l + b * l * l).ln_1p())
        .sum();
    Ok((-0.5 * ln).exp())
}

/// mgf of `B_n`: `E[e^{−s B_n}] = d_n(−2s/n)^{−1/2}`.
pub fn phi_bn(ctx: &KernelContext, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return domain(format!("expected s >= 0, got {s}"));
    }
    let n = ctx.n() as f64;
    Ok((-0.5 * ctx.ln_dn_neg(2.0 * s / n)?).exp())
}

/// `ln(sinh x / x)` for `x ≥ 0`, accurate near zero and for large `x`.
pub fn ln_sinhc(x: f64) -> f64 {
    if x < 1e-2 {
        let x2 = x * x;
        (x2 / 6.0 + x2 * x2 / 120.0).ln_1p()
    } else if x > 20.0 {
        x - (2.0 * x).ln() + (-(-2.0 * x).exp()).ln_1p()
    } else {
        (x.sinh() / x).ln()
    }
}

/// mgf of the limit `B`: `E[e^{−s B}] = (sinh√(2s) / √(2s))^{−1/2}`.
pub fn phi_b(s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return domain(format!("expected s >= 0, got {s}"));
    }
    Ok((-0.5 * ln_sinhc((2.0 * s).sqrt())).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alpha_beta_examples() {
        let ab = alpha_beta(&MgfPoint::new(3.0, 0.0, 3.0).unwrap()).unwrap();
        assert_eq!((ab.alpha, ab.beta), (-3.0, -3.0));
        let ab = alpha_beta(&MgfPoint::new(1.0, 0.0, 4.0).unwrap()).unwrap();
        assert_eq!((ab.alpha, ab.beta), (-4.0, -1.0));
        let ab = alpha_beta(&MgfPoint::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!((ab.alpha, ab.beta), (-2.0, 0.0));
    }

    #[test]
    fn alpha_beta_identities() {
        for &(a, b, c) in &[(0.3, 0.1, 2.0), (10.0, -3.0, 1.5), (1e-3, 0.0, 7.0), (5.0, 4.99, 5.0)] {
            let ab = alpha_beta(&MgfPoint::new(a, b, c).unwrap()).unwrap();
            assert!(ab.alpha <= ab.beta && ab.beta <= 0.0);
            assert_relative_eq!(ab.alpha + ab.beta, -(a + c), max_relative = 1e-13);
            assert_relative_eq!(ab.alpha * ab.beta, a * c - b * b, max_relative = 1e-13);
        }
    }

    #[test]
    fn invalid_points_rejected() {
        assert!(MgfPoint::new(-1.0, 0.0, 1.0).is_err());
        assert!(MgfPoint::new(1.0, 2.0, 1.0).is_err());
        assert!(phi_b(-0.1).is_err());
    }

    #[test]
    fn phi_n_examples() {
        let ctx4 = KernelContext::new(4).unwrap();
        assert_eq!(phi_n(&ctx4, &MgfPoint::new(0.0, 0.0, 0.0).unwrap()).unwrap(), 1.0);
        let ctx2 = KernelContext::new(2).unwrap();
        assert_relative_eq!(phi_n(&ctx2, &MgfPoint::new(4.0, 0.0, 4.0).unwrap()).unwrap(), 0.5, epsilon = 1e-15);
        let ctx10 = KernelContext::new(10).unwrap();
        let p = MgfPoint::new(1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(
            phi_n(&ctx10, &p).unwrap(),
            phi_n_spectral(&ctx10, &p).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn univariate_examples() {
        assert_eq!(phi_b(0.0).unwrap(), 1.0);
        let ctx2 = KernelContext::new(2).unwrap();
        assert_relative_eq!(phi_bn(&ctx2, 2.0).unwrap(), 1.0 / 1.5f64.sqrt(), epsilon = 1e-15);
        // (sinh 4 / 4)^{-1/2}
        assert_relative_eq!(phi_b(8.0).unwrap(), (4.0f64.sinh() / 4.0).powf(-0.5), max_relative = 1e-15);
        assert_relative_eq!(phi_b(8.0).unwrap(), 0.382_850, epsilon = 5e-7);
        assert_relative_eq!(phi_b(1e-9).unwrap(), 1.0 - 1e-9 / 6.0, max_relative = 1e-15);
    }

    #[test]
    fn ln_sinhc_branches_join() {
        for x in [1e-2, 20.0] {
            let lo = x * (1.0 - 1e-12);
            let hi = x * (1.0 + 1e-12);
            assert_relative_eq!(ln_sinhc(lo), ln_sinhc(hi), max_relative = 1e-10);
            assert_relative_eq!(ln_sinhc(x), (x.sinh() / x).ln(), max_relative = 1e-13);
        }
        assert!(ln_sinhc(1e6).is_finite());
    }

    #[test]
    fn scaled_mgf_converges_to_limit() {
        let ctx = KernelContext::new(500).unwrap();
        for i in 0..=100 {
            let s = 0.5 * i as f64;
            assert!((phi_bn(&ctx, s).unwrap() - phi_b(s).unwrap()).abs() <= 0.01);
        }
        for s in [0.5f64, 2.0, 10.0] {
            let x = (2.0 * s).sqrt();
            let d = crate::kernel::dn_neg(1000, 2.0 * s / 1000.0).unwrap();
            assert_relative_eq!(d, x.sinh() / x, max_relative = 1e-3);
        }
    }
}

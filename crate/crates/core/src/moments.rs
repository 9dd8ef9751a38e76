//! Moments of `θ_n` and `θ` by two-dimensional quadrature, and negative
//! moments of positive variables from their Laplace transforms.
//!
//! With `q = m/2`, the `m`-th moment is
//!
//! ```text
//! E[θ^m] = m! / (2^m Γ(q)²) ∬ s11^{q−1} s22^{q−1} a_q(s11, s22) ds11 ds22
//! ```
//!
//! where `a_q` is the coefficient of `u^q` in `Π_j (c_j − μ_j² u)^{−1/2}`.
//! The moment does not change when every `μ_j` is multiplied by the same
//! constant, so the discrete case works with `μ_j = λ_j/n`, which tends to
//! `1/(jπ)²`, and the continuous case uses those limits directly.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, YuleError};
use crate::kernel::{dn_neg_log_derivative, BuildMode, KernelContext};
use crate::mgf::ln_sinhc;
use crate::quadrature::{integrate, integrate_2d, Adaptive2dConfig, TensorIntegrand, Tolerance};
use crate::series::{factorial, neg_half_coeff};

/// Each axis of `[0, ∞)` is mapped from `(0, 1)` by `s = S (t / (1 − t))²`.
const MAP_SCALE: f64 = 10.0;
/// Explicit eigenvalues kept for the continuous spectrum before the tail
/// expansion takes over.
const CONTINUOUS_HEAD: usize = 200;
/// Band around the diagonal where the closed-form integrand switches to the
/// series form.
const DIAGONAL_BAND: f64 = 1e-4;
/// `e^{−700}`: integrand values below this are dropped.
const LOG_UNDERFLOW: f64 = 1400.0;
const ABS_TOL_FLOOR: f64 = 1e-14;

/// Walk length, or the continuous-time limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Discrete(usize),
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Power sums of the spectrum and truncated-series differentiation.
    SeriesSpectral,
    /// Second moment only: divided differences of `d_n'/d_n`.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRequest {
    pub target: Target,
    pub m: usize,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub backend: Backend,
}

impl MomentRequest {
    pub fn new(target: Target, m: usize) -> Self {
        Self {
            target,
            m,
            rel_tol: 1e-7,
            max_subdivisions: 2_000_000,
            backend: Backend::SeriesSpectral,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_max_subdivisions(mut self, cells: usize) -> Self {
        self.max_subdivisions = cells;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Target::Discrete(n) = self.target {
            if n < 2 {
                return domain(format!("walk length must be at least 2, got {n}"));
            }
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return domain(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol));
        }
        if self.max_subdivisions < 16 {
            return domain("max_subdivisions must be at least 16");
        }
        if self.backend == Backend::ClosedForm && self.m != 2 && self.m % 2 == 0 {
            return domain("the closed-form backend computes the second moment only");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub target: Target,
    pub m: usize,
    pub value: f64,
    pub abs_error_estimate: f64,
    pub cells_used: usize,
    pub backend: Backend,
    /// True when the value is known exactly (odd order, order zero).
    pub exact: bool,
}

/// Normalised spectrum `μ_j` of `K_n / n`, or the limit `μ_k = 1/(kπ)²`.
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    Discrete {
        n: usize,
        mu: Vec<f64>,
        closed_form: bool,
    },
    Continuous,
}

impl Spectrum {
    pub fn from_context(ctx: &KernelContext) -> Self {
        let n = ctx.n() as f64;
        Spectrum::Discrete {
            n: ctx.n(),
            mu: ctx.eigenvalues().iter().map(|l| l / n).collect(),
            closed_form: ctx.build_mode() != BuildMode::Spectral,
        }
    }

    pub fn target(&self) -> Target {
        match self {
            Spectrum::Discrete { n, .. } => Target::Discrete(*n),
            Spectrum::Continuous => Target::Continuous,
        }
    }

    /// `Σ ln(1 + x μ_j)`.
    pub fn log_const(&self, x: f64) -> f64 {
        match self {
            Spectrum::Discrete { n, mu, closed_form } => {
                if *closed_form {
                    crate::kernel::ln_dn_neg(*n, x / *n as f64).expect("x is non-negative")
                } else {
                    mu.iter().map(|m| (x * m).ln_1p()).sum()
                }
            }
            Spectrum::Continuous => ln_sinhc(x.sqrt()),
        }
    }

    /// `G(x) = Σ μ_j / (1 + x μ_j)`, the derivative of [`Self::log_const`].
    pub fn resolvent_trace(&self, x: f64) -> f64 {
        match self {
            Spectrum::Discrete { n, mu, closed_form } => {
                if *closed_form {
                    let nf = *n as f64;
                    -dn_neg_log_derivative(*n, x / nf).expect("x is non-negative") / nf
                } else {
                    mu.iter().map(|m| m / (1.0 + x * m)).sum()
                }
            }
            Spectrum::Continuous => continuous_resolvent_trace(x),
        }
    }

    /// Power sums `S_p = Σ_j r_j^p`, `r_j = μ_j² / ((1+xμ_j)(1+yμ_j))`,
    /// written to `out[p−1]`.
    pub fn power_sums(&self, x: f64, y: f64, out: &mut [f64]) {
        match self {
            Spectrum::Discrete { mu, .. } => head_power_sums(mu, x, y, out),
            Spectrum::Continuous => {
                let k = continuous_head_len(x.max(y));
                let mu: Vec<f64> = (1..=k).map(continuous_mu).collect();
                head_power_sums(&mu, x, y, out);
                for (p, v) in out.iter_mut().enumerate() {
                    *v += continuous_tail(x, y, p + 1, k);
                }
            }
        }
    }
}

#[inline]
fn continuous_mu(k: usize) -> f64 {
    let kp = k as f64 * std::f64::consts::PI;
    1.0 / (kp * kp)
}

fn continuous_head_len(x_max: f64) -> usize {
    let need = (2.0 * x_max.sqrt() / std::f64::consts::PI).ceil() as usize + 1;
    need.max(CONTINUOUS_HEAD)
}

fn head_power_sums(mu: &[f64], x: f64, y: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for &m in mu {
        let r = m * m / ((1.0 + x * m) * (1.0 + y * m));
        let mut rp = r;
        for v in out.iter_mut() {
            *v += rp;
            rp *= r;
        }
    }
}

/// `Σ_{k>K} r_k^p` for the continuous spectrum: midpoint Euler–Maclaurin
/// with the integral expanded in `z = 1/k²`.
fn continuous_tail(x: f64, y: f64, p: usize, k_head: usize) -> f64 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let big_x = k_head as f64 + 0.5;
    let (a, b) = (x / pi2, y / pi2);
    let pf = p as f64;
    let inv_x2 = 1.0 / (big_x * big_x);
    // coefficients of (1 + a z)^{−p} and (1 + b z)^{−p}
    let mut ea = vec![1.0f64];
    let mut eb = vec![1.0f64];
    let lead = pi2.powi(-2 * p as i32) * big_x.powf(1.0 - 4.0 * pf);
    let mut total = 0.0;
    for i in 0..400 {
        if i > 0 {
            let fi = i as f64;
            let na = ea[i - 1] * (-(pf + fi - 1.0) / fi) * a;
            let nb = eb[i - 1] * (-(pf + fi - 1.0) / fi) * b;
            ea.push(na);
            eb.push(nb);
        }
        let c: f64 = (0..=i).map(|j| ea[j] * eb[i - j]).sum();
        let term = lead * c * inv_x2.powi(i as i32) / (4.0 * pf + 2.0 * i as f64 - 1.0);
        total += term;
        if i > 2 && term.abs() <= 1e-17 * total.abs() {
            break;
        }
    }
    // midpoint correction (1/24) f'(X)
    let mu = 1.0 / (big_x * big_x * pi2);
    let r = mu * mu / ((1.0 + x * mu) * (1.0 + y * mu));
    let dlog = pf * (-2.0 / big_x) * (2.0 - x * mu / (1.0 + x * mu) - y * mu / (1.0 + y * mu));
    total + r.powi(p as i32) * dlog / 24.0
}

/// `Σ_k μ_k / (1 + x μ_k)` with `μ_k = 1/(kπ)²`, i.e. `d/dx ln(sinh√x/√x)`.
fn continuous_resolvent_trace(x: f64) -> f64 {
    if x < 1e-3 {
        return 1.0 / 6.0 - x / 90.0 + x * x / 945.0 - x * x * x / 9450.0;
    }
    let z = x.sqrt();
    let coth = if z > 20.0 { 1.0 } else { 1.0 / z.tanh() };
    0.5 * (coth / z - 1.0 / x)
}

#[inline]
fn map_axis(t: f64) -> (f64, f64) {
    let w = t / (1.0 - t);
    let s = MAP_SCALE * w * w;
    let jac = MAP_SCALE * 2.0 * t / ((1.0 - t) * (1.0 - t) * (1.0 - t));
    (s, jac)
}

/// Per-node data shared across one row of the tensor grid.
struct AxisData {
    s: [f64; 15],
    weight: [f64; 15],
    log_c: [f64; 15],
}

fn axis_data(spectrum: &Spectrum, ts: &[f64; 15], q: usize) -> AxisData {
    let mut d = AxisData {
        s: [0.0; 15],
        weight: [0.0; 15],
        log_c: [0.0; 15],
    };
    for i in 0..15 {
        let (s, jac) = map_axis(ts[i]);
        d.s[i] = s;
        d.log_c[i] = spectrum.log_const(s);
        d.weight[i] = if d.log_c[i] > LOG_UNDERFLOW || !jac.is_finite() {
            0.0
        } else {
            s.powi(q as i32 - 1) * jac
        };
    }
    d
}

/// Normalising constant `m! / (2^m Γ(m/2)²)`.
fn moment_norm(m: usize) -> f64 {
    let g = factorial(m / 2 - 1);
    factorial(m) / (2f64.powi(m as i32) * g * g)
}

/// Integrand of the series backend on the unit square.
pub struct SeriesIntegrand<'a> {
    spectrum: &'a Spectrum,
    q: usize,
    norm: f64,
}

impl<'a> SeriesIntegrand<'a> {
    pub fn new(spectrum: &'a Spectrum, m: usize) -> Self {
        Self {
            spectrum,
            q: m / 2,
            norm: moment_norm(m),
        }
    }
}

/// Row-cached `1/(1 + s μ_j)` and the head of the spectrum.
struct Resolvents {
    mu2: Vec<f64>,
    rows: Vec<f64>,
    len: usize,
}

fn resolvents(mu: &[f64], s: &[f64; 15]) -> Resolvents {
    let len = mu.len();
    let mut rows = vec![0.0; 15 * len];
    for i in 0..15 {
        for (k, &m) in mu.iter().enumerate() {
            rows[i * len + k] = 1.0 / (1.0 + s[i] * m);
        }
    }
    Resolvents {
        mu2: mu.iter().map(|m| m * m).collect(),
        rows,
        len,
    }
}

impl SeriesIntegrand<'_> {
    fn head(&self, xs: &AxisData, ys: &AxisData) -> Vec<f64> {
        match self.spectrum {
            Spectrum::Discrete { mu, .. } => mu.clone(),
            Spectrum::Continuous => {
                let smax = xs.s.iter().chain(ys.s.iter()).zip(xs.weight.iter().chain(ys.weight.iter()))
                    .filter(|(_, w)| **w != 0.0)
                    .fold(0.0f64, |acc, (s, _)| acc.max(*s));
                (1..=continuous_head_len(smax)).map(continuous_mu).collect()
            }
        }
    }
}

impl TensorIntegrand for SeriesIntegrand<'_> {
    fn eval_tensor(&self, ts: &[f64; 15], us: &[f64; 15], out: &mut [[f64; 15]; 15]) {
        let q = self.q;
        let xd = axis_data(self.spectrum, ts, q);
        let yd = axis_data(self.spectrum, us, q);
        let mu = self.head(&xd, &yd);
        let rx = resolvents(&mu, &xd.s);
        let ry = resolvents(&mu, &yd.s);
        let mut sums = vec![0.0; q];
        for i in 0..15 {
            for j in 0..15 {
                let w = xd.weight[i] * yd.weight[j];
                let log_c = xd.log_c[i] + yd.log_c[j];
                if w == 0.0 || log_c > LOG_UNDERFLOW {
                    out[i][j] = 0.0;
                    continue;
                }
                sums.iter_mut().for_each(|v| *v = 0.0);
                let (vx, vy) = (&rx.rows[i * rx.len..(i + 1) * rx.len], &ry.rows[j * ry.len..(j + 1) * ry.len]);
                for k in 0..rx.len {
                    let r = rx.mu2[k] * vx[k] * vy[k];
                    let mut rp = r;
                    for v in sums.iter_mut() {
                        *v += rp;
                        rp *= r;
                    }
                }
                if let Spectrum::Continuous = self.spectrum {
                    for (p, v) in sums.iter_mut().enumerate() {
                        *v += continuous_tail(xd.s[i], yd.s[j], p + 1, rx.len);
                    }
                }
                out[i][j] = self.norm * w * neg_half_coeff(log_c, &sums, q);
            }
        }
    }
}

/// Second-moment integrand built from `G = Σ μ/(1+xμ)`:
/// `a_1 = ½ φ0 (G(y) − G(x)) / (x − y)`, with the series form near the
/// diagonal.
pub struct ClosedFormIntegrand<'a> {
    spectrum: &'a Spectrum,
}

impl<'a> ClosedFormIntegrand<'a> {
    pub fn new(spectrum: &'a Spectrum) -> Self {
        Self { spectrum }
    }
}

impl TensorIntegrand for ClosedFormIntegrand<'_> {
    fn eval_tensor(&self, ts: &[f64; 15], us: &[f64; 15], out: &mut [[f64; 15]; 15]) {
        let xd = axis_data(self.spectrum, ts, 1);
        let yd = axis_data(self.spectrum, us, 1);
        let gx: Vec<f64> = xd.s.iter().map(|&s| self.spectrum.resolvent_trace(s)).collect();
        let gy: Vec<f64> = yd.s.iter().map(|&s| self.spectrum.resolvent_trace(s)).collect();
        let mut sums = [0.0];
        for i in 0..15 {
            for j in 0..15 {
                let w = xd.weight[i] * yd.weight[j];
                let log_c = xd.log_c[i] + yd.log_c[j];
                if w == 0.0 || log_c > LOG_UNDERFLOW {
                    out[i][j] = 0.0;
                    continue;
                }
                let (x, y) = (xd.s[i], yd.s[j]);
                let phi0 = (-0.5 * log_c).exp();
                let a1 = if (x - y).abs() < DIAGONAL_BAND * (1.0 + x.min(y)) {
                    self.spectrum.power_sums(x, y, &mut sums);
                    0.5 * phi0 * sums[0]
                } else {
                    0.5 * phi0 * (gy[j] - gx[i]) / (x - y)
                };
                // m!/(2^m Γ(1)²) = 1/2
                out[i][j] = 0.5 * w * a1;
            }
        }
    }
}

fn spectrum_for(target: Target, ctx: Option<&KernelContext>) -> Result<Spectrum> {
    match (target, ctx) {
        (Target::Continuous, _) => Ok(Spectrum::Continuous),
        (Target::Discrete(n), Some(c)) => {
            if c.n() != n {
                return domain(format!("context is for n = {}, request is for n = {n}", c.n()));
            }
            Ok(Spectrum::from_context(c))
        }
        (Target::Discrete(n), None) => Ok(Spectrum::from_context(&KernelContext::new(n)?)),
    }
}

fn exact_result(req: &MomentRequest, value: f64) -> MomentResult {
    MomentResult {
        target: req.target,
        m: req.m,
        value,
        abs_error_estimate: 0.0,
        cells_used: 0,
        backend: req.backend,
        exact: true,
    }
}

/// Integrates any tensor integrand over the unit square with the request's
/// budget, converting an exhausted budget into a convergence error.
pub fn integrate_unit_square<I: TensorIntegrand>(f: &I, req: &MomentRequest) -> Result<MomentResult> {
    let cfg = Adaptive2dConfig {
        tol: Tolerance::new(ABS_TOL_FLOOR, req.rel_tol),
        max_cells: req.max_subdivisions,
        ..Default::default()
    };
    let r = integrate_2d(f, (0.0, 1.0), (0.0, 1.0), &cfg);
    let res = MomentResult {
        target: req.target,
        m: req.m,
        value: r.value,
        abs_error_estimate: r.abs_error,
        cells_used: r.cells,
        backend: req.backend,
        exact: false,
    };
    if !r.value.is_finite() {
        let n = match req.target {
            Target::Discrete(n) => n,
            Target::Continuous => 0,
        };
        return Err(YuleError::Numeric {
            n,
            reason: "non-finite integrand value".into(),
        });
    }
    if r.converged {
        Ok(res)
    } else {
        Err(YuleError::Convergence { partial: Box::new(res) })
    }
}

/// `E[θ_n^m]` (or `E[θ^m]`). A context may be supplied to reuse a cached
/// spectrum; otherwise one is built from the request.
pub fn moment(req: &MomentRequest, ctx: Option<&KernelContext>) -> Result<MomentResult> {
    req.validate()?;
    if req.m % 2 == 1 {
        return Ok(exact_result(req, 0.0));
    }
    if req.m == 0 {
        return Ok(exact_result(req, 1.0));
    }
    let spectrum = spectrum_for(req.target, ctx)?;
    match req.backend {
        Backend::SeriesSpectral => integrate_unit_square(&SeriesIntegrand::new(&spectrum, req.m), req),
        Backend::ClosedForm => integrate_unit_square(&ClosedFormIntegrand::new(&spectrum), req),
    }
}

/// `E[θ_n²]` through the closed-form integrand.
pub fn second_moment_closed_form(ctx: &KernelContext, rel_tol: f64) -> Result<MomentResult> {
    let req = MomentRequest::new(Target::Discrete(ctx.n()), 2)
        .with_rel_tol(rel_tol)
        .with_backend(Backend::ClosedForm);
    moment(&req, Some(ctx))
}

/// Detailed outcome of [`negative_moment_detailed`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativeMoment {
    pub value: f64,
    pub abs_error_estimate: f64,
    /// Estimated contribution beyond the last integrated panel.
    pub tail_estimate: f64,
    /// Upper end of the last integrated panel.
    pub last_panel_end: f64,
}

/// `E[X^{−m}] = (1/(m−1)!) ∫_0^∞ s^{m−1} E[e^{−sX}] ds`.
pub fn negative_moment<F>(mgf: F, m: usize, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok(negative_moment_detailed(mgf, m, rel_tol)?.value)
}

/// The integral is taken over `[0, 1]` and then over dyadic panels
/// `[2^k, 2^{k+1}]`. Once the panel integrals shrink geometrically with
/// ratio `ρ < 0.97`, the remainder is estimated as the algebraic tail
/// `last·ρ/(1−ρ)`. Panel ratios that stay near or above one mean the
/// integral diverges.
pub fn negative_moment_detailed<F>(mgf: F, m: usize, rel_tol: f64) -> Result<NegativeMoment>
where
    F: Fn(f64) -> Result<f64>,
{
    if m == 0 {
        return domain("negative moments are defined for m >= 1");
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return domain(format!("rel_tol must lie in (0, 1), got {rel_tol}"));
    }
    let norm = 1.0 / factorial(m - 1);
    let h = |s: f64| -> f64 {
        match mgf(s) {
            Ok(v) => norm * s.powi(m as i32 - 1) * v,
            Err(_) => f64::NAN,
        }
    };
    let panel_tol = |total: f64| Tolerance::new(1e-300_f64.max(0.01 * rel_tol * total.abs()), 0.01 * rel_tol);
    let first = integrate(&h, 0.0, 1.0, Tolerance::new(1e-300, 0.01 * rel_tol), 2000);
    if !first.value.is_finite() {
        return Err(YuleError::Numeric {
            n: 0,
            reason: "mgf evaluation failed on [0, 1]".into(),
        });
    }
    let mut total = first.value;
    let mut err = first.abs_error;
    let mut prev: Option<f64> = None;
    let mut growing = 0usize;
    for k in 0..1024 {
        let a = 2f64.powi(k);
        let b = 2.0 * a;
        let r = integrate(&h, a, b, panel_tol(total), 2000);
        if !r.value.is_finite() {
            return Err(YuleError::Numeric {
                n: 0,
                reason: format!("non-finite integrand on [{a:e}, {b:e}]"),
            });
        }
        total += r.value;
        err += r.abs_error;
        if let Some(p) = prev {
            if p > 0.0 {
                let rho = r.value / p;
                if rho >= 0.97 {
                    growing += 1;
                    if growing >= 8 && k >= 12 {
                        return Err(YuleError::Divergence(format!(
                            "panel integrals stopped shrinking (ratio {rho:.4} on [{a:e}, {b:e}])"
                        )));
                    }
                } else {
                    growing = 0;
                    let tail = r.value * rho / (1.0 - rho);
                    if r.value <= 0.01 * rel_tol * total && tail <= rel_tol * total {
                        return Ok(NegativeMoment {
                            value: total + tail,
                            abs_error_estimate: err + tail.abs() * 0.1,
                            tail_estimate: tail,
                            last_panel_end: b,
                        });
                    }
                }
            } else if r.value == 0.0 {
                return Ok(NegativeMoment {
                    value: total,
                    abs_error_estimate: err,
                    tail_estimate: 0.0,
                    last_panel_end: b,
                });
            }
        }
        prev = Some(r.value);
    }
    Err(YuleError::Divergence("tail did not become negligible before s = 2^1024".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_shortcuts() {
        for m in [1usize, 3, 7, 15] {
            let r = moment(&MomentRequest::new(Target::Discrete(7), m), None).unwrap();
            assert_eq!(r.value, 0.0);
            assert!(r.exact);
        }
        let r = moment(&MomentRequest::new(Target::Continuous, 0), None).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn request_validation() {
        assert!(moment(&MomentRequest::new(Target::Discrete(1), 2), None).is_err());
        assert!(moment(&MomentRequest::new(Target::Discrete(5), 2).with_rel_tol(0.0), None).is_err());
        assert!(moment(
            &MomentRequest::new(Target::Discrete(5), 4).with_backend(Backend::ClosedForm),
            None
        )
        .is_err());
    }

    #[test]
    fn two_point_walk_has_unit_moments() {
        for m in [2usize, 4, 6] {
            let r = moment(&MomentRequest::new(Target::Discrete(2), m).with_rel_tol(1e-9), None).unwrap();
            assert_relative_eq!(r.value, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn continuous_power_sums_match_brute_force() {
        let spectrum = Spectrum::Continuous;
        for &(x, y) in &[(0.0, 0.0), (3.0, 50.0), (1e3, 2e4), (1e5, 1e5)] {
            let mut fast = [0.0; 4];
            spectrum.power_sums(x, y, &mut fast);
            let mut slow = [0.0; 4];
            let mu: Vec<f64> = (1..=400_000).map(continuous_mu).collect();
            head_power_sums(&mu, x, y, &mut slow);
            for p in 0..4 {
                assert_relative_eq!(fast[p], slow[p], max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn continuous_resolvent_matches_series() {
        for x in [0.0, 5e-4, 1e-3, 0.3, 7.0, 500.0, 1e6] {
            let k = 2_000_000;
            let mu: Vec<f64> = (1..=k).map(continuous_mu).collect();
            // Σ_{j>K} μ_j ≈ 1/(π² (K + ½)) once x μ_K is negligible
            let tail = 1.0 / (std::f64::consts::PI.powi(2) * (k as f64 + 0.5));
            let direct: f64 = mu.iter().rev().map(|m| m / (1.0 + x * m)).sum::<f64>() + tail;
            assert_relative_eq!(continuous_resolvent_trace(x), direct, max_relative = 1e-9);
        }
    }

    #[test]
    fn half_domain_symmetry() {
        struct Half<'a>(SeriesIntegrand<'a>);
        impl TensorIntegrand for Half<'_> {
            fn eval_tensor(&self, vs: &[f64; 15], us: &[f64; 15], out: &mut [[f64; 15]; 15]) {
                for j in 0..15 {
                    let xs: [f64; 15] = std::array::from_fn(|i| us[j] * vs[i]);
                    let ys = [us[j]; 15];
                    let mut grid = [[0.0; 15]; 15];
                    self.0.eval_tensor(&xs, &ys, &mut grid);
                    for i in 0..15 {
                        out[i][j] = grid[i][0] * us[j];
                    }
                }
            }
        }
        let ctx = KernelContext::new(6).unwrap();
        let spectrum = Spectrum::from_context(&ctx);
        let req = MomentRequest::new(Target::Discrete(6), 2).with_rel_tol(1e-11);
        let full = moment(&req, Some(&ctx)).unwrap().value;
        let half = integrate_unit_square(&Half(SeriesIntegrand::new(&spectrum, 2)), &req).unwrap().value;
        assert_relative_eq!(2.0 * half, full, max_relative = 1e-9);
    }

    /// `E[θ²] = ¼ Σ_j μ_j² h_j²` with `h_j = ∫ Π_k(1+sμ_k)^{−1/2} / (1+sμ_j) ds`.
    fn separable_second_moment(n: usize) -> f64 {
        let ctx = KernelContext::new(n).unwrap();
        let nf = n as f64;
        let mu: Vec<f64> = ctx.eigenvalues().iter().map(|l| l / nf).collect();
        mu.iter()
            .map(|&mj| {
                let f = |t: f64| {
                    let (s, jac) = map_axis(t);
                    let lc: f64 = mu.iter().map(|m| (s * m).ln_1p()).sum();
                    if lc > LOG_UNDERFLOW {
                        0.0
                    } else {
                        jac * (-0.5 * lc).exp() / (1.0 + s * mj)
                    }
                };
                let h = integrate(f, 0.0, 1.0, Tolerance::new(1e-16, 1e-13), 5000).value;
                0.25 * mj * mj * h * h
            })
            .sum()
    }

    #[test]
    fn second_moment_against_separable_oracle() {
        for n in [3usize, 5, 10] {
            let want = separable_second_moment(n);
            let got = moment(&MomentRequest::new(Target::Discrete(n), 2).with_rel_tol(1e-10), None).unwrap();
            assert_relative_eq!(got.value, want, epsilon = 1e-9);
            let cf = second_moment_closed_form(&KernelContext::new(n).unwrap(), 1e-10).unwrap();
            assert_relative_eq!(cf.value, want, epsilon = 1e-9);
        }
        assert_relative_eq!(separable_second_moment(5), 0.341109, epsilon = 5e-7);
    }

    #[test]
    fn spectral_mode_agrees() {
        let ctx = KernelContext::with_mode(8, BuildMode::Spectral).unwrap();
        let a = moment(&MomentRequest::new(Target::Discrete(8), 2).with_rel_tol(1e-10), Some(&ctx)).unwrap();
        let b = moment(&MomentRequest::new(Target::Discrete(8), 2).with_rel_tol(1e-10), None).unwrap();
        assert_relative_eq!(a.value, b.value, epsilon = 1e-9);
    }

    #[test]
    fn budget_exhaustion_carries_partial_result() {
        let req = MomentRequest::new(Target::Discrete(10), 2)
            .with_rel_tol(1e-13)
            .with_max_subdivisions(20);
        match moment(&req, None) {
            Err(YuleError::Convergence { partial }) => {
                assert!(partial.cells_used <= 20);
                assert!(partial.value > 0.2 && partial.value < 0.4);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn negative_moment_of_constant() {
        let v = negative_moment(|s: f64| Ok((-s).exp()), 1, 1e-10).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-9);
        // X ≡ 2: E[X^{-3}] = 1/8
        let v = negative_moment(|s: f64| Ok((-2.0 * s).exp()), 3, 1e-10).unwrap();
        assert_relative_eq!(v, 0.125, max_relative = 1e-9);
    }

    #[test]
    fn negative_moment_power_law_tail() {
        // Gamma(k=2.5, θ=1): mgf (1+s)^{-2.5}, E[X^{-1}] = 1/1.5
        let v = negative_moment(|s: f64| Ok((1.0 + s).powf(-2.5)), 1, 1e-9).unwrap();
        assert_relative_eq!(v, 1.0 / 1.5, max_relative = 1e-7);
    }

    #[test]
    fn negative_moment_divergence() {
        let ctx = KernelContext::new(2).unwrap();
        let r = negative_moment(|s| crate::mgf::phi_bn(&ctx, s), 1, 1e-8);
        assert!(matches!(r, Err(YuleError::Divergence(_))), "{r:?}");
        let ctx = KernelContext::new(3).unwrap();
        let r = negative_moment(|s| crate::mgf::phi_bn(&ctx, s), 1, 1e-8);
        assert!(matches!(r, Err(YuleError::Divergence(_))), "{r:?}");
    }
}

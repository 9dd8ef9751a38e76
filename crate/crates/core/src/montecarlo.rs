//! Coupled simulation of `θ_n` and `θ` on a shared pair of Wiener paths.
//!
//! Both paths are sampled on a fine grid of `N = L·n` steps. The discrete
//! quantities use the path at the coarse points `i/n`, `i = 1..n`:
//!
//! ```text
//! A_n = (1/n) Σ W1(i/n) W2(i/n) − (1/n²) Σ W1(i/n) Σ W2(i/n)
//! ```
//!
//! which is the bilinear form of the coarse increments with weights
//! `M((j−1)/n, (k−1)/n)`. The limit quantities `A = ∫W1W2 − ∫W1∫W2` (and
//! `B`, `C`) are approximated by left-endpoint Riemann sums on the fine grid.
//!
//! Each replicate draws from its own ChaCha8 stream keyed by
//! `(seed, replicate index)`, replicates are grouped in fixed-size chunks,
//! and chunk statistics are merged in chunk order, so results do not depend
//! on the thread count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::normal::{inverse_cdf, open_uniform};

const CHUNK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    /// Fine steps per coarse step, `L`.
    pub fine_factor: usize,
    pub replicates: u64,
    pub seed: u64,
    /// Pair each draw with its mirror image `W1 → −W1` and average the pair.
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(n: usize, fine_factor: usize, replicates: u64, seed: u64) -> Self {
        Self {
            n,
            fine_factor,
            replicates,
            seed,
            antithetic: false,
        }
    }

    pub fn fine_steps(&self) -> usize {
        self.n * self.fine_factor
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain(format!("walk length must be at least 2, got {}", self.n));
        }
        if self.fine_factor < 1 {
            return domain("fine_factor must be at least 1");
        }
        if self.replicates < 1 {
            return domain("at least one replicate is required");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledSample {
    pub a_n: f64,
    pub b_n: f64,
    pub c_n: f64,
    pub a_hat: f64,
    pub b_hat: f64,
    pub c_hat: f64,
    pub theta_n: f64,
    pub theta_hat: f64,
}

impl CoupledSample {
    /// Flips the sign of `W1`.
    pub fn mirrored(&self) -> Self {
        Self {
            a_n: -self.a_n,
            a_hat: -self.a_hat,
            theta_n: -self.theta_n,
            theta_hat: -self.theta_hat,
            ..*self
        }
    }

    fn degenerate(&self) -> bool {
        !(self.b_n > 0.0 && self.c_n > 0.0 && self.b_hat > 0.0 && self.c_hat > 0.0)
    }
}

/// Random stream for one replicate.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

#[inline]
fn std_normal<R: RngCore>(rng: &mut R) -> f64 {
    inverse_cdf(open_uniform(rng.next_u64()))
}

#[derive(Default)]
struct PathSums {
    w1: f64,
    w2: f64,
    w11: f64,
    w22: f64,
    w12: f64,
}

impl PathSums {
    #[inline]
    fn add(&mut self, x: f64, y: f64) {
        self.w1 += x;
        self.w2 += y;
        self.w11 += x * x;
        self.w22 += y * y;
        self.w12 += x * y;
    }

    /// Centred second moments `(A, B, C)` of `count` points.
    fn centred(&self, count: f64) -> (f64, f64, f64) {
        let (m1, m2) = (self.w1 / count, self.w2 / count);
        (
            self.w12 / count - m1 * m2,
            self.w11 / count - m1 * m1,
            self.w22 / count - m2 * m2,
        )
    }
}

/// Builds a sample from a fully specified pair of fine increment sequences
/// (each of length `N = L·n`).
pub fn sample_from_increments(n: usize, fine_factor: usize, dw1: &[f64], dw2: &[f64]) -> CoupledSample {
    let big_n = n * fine_factor;
    assert_eq!(dw1.len(), big_n);
    assert_eq!(dw2.len(), big_n);
    let mut coarse = PathSums::default();
    let mut fine = PathSums::default();
    let (mut w1, mut w2) = (0.0, 0.0);
    for i in 0..big_n {
        fine.add(w1, w2);
        w1 += dw1[i];
        w2 += dw2[i];
        if (i + 1) % fine_factor == 0 {
            coarse.add(w1, w2);
        }
    }
    finish(coarse.centred(n as f64), fine.centred(big_n as f64))
}

fn finish((a_n, b_n, c_n): (f64, f64, f64), (a_hat, b_hat, c_hat): (f64, f64, f64)) -> CoupledSample {
    CoupledSample {
        a_n,
        b_n,
        c_n,
        a_hat,
        b_hat,
        c_hat,
        theta_n: a_n / (b_n * c_n).sqrt(),
        theta_hat: a_hat / (b_hat * c_hat).sqrt(),
    }
}

fn draw<R: RngCore>(n: usize, fine_factor: usize, rng: &mut R) -> CoupledSample {
    let big_n = n * fine_factor;
    let sd = (1.0 / big_n as f64).sqrt();
    let mut coarse = PathSums::default();
    let mut fine = PathSums::default();
    let (mut w1, mut w2) = (0.0, 0.0);
    for _ in 0..n {
        for _ in 0..fine_factor {
            fine.add(w1, w2);
            w1 += sd * std_normal(rng);
            w2 += sd * std_normal(rng);
        }
        coarse.add(w1, w2);
    }
    finish(coarse.centred(n as f64), fine.centred(big_n as f64))
}

/// One coupled draw; degenerate draws (a non-positive denominator) are
/// discarded and redrawn from the same stream. Returns the sample and the
/// number of redraws.
pub fn sample_coupled<R: RngCore>(cfg: &SimConfig, rng: &mut R) -> (CoupledSample, u32) {
    let mut redraws = 0;
    loop {
        let s = draw(cfg.n, cfg.fine_factor, rng);
        if !s.degenerate() {
            return (s, redraws);
        }
        redraws += 1;
    }
}

/// Streaming mean and variance (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl RunningStats {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / total as f64;
        self.m2 += other.m2 + d * d * (self.count as f64) * (other.count as f64) / total as f64;
        self.count = total;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            mean: self.mean,
            stderr: (self.variance() / self.count.max(1) as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    /// `|mean − target| ≤ k·stderr + allowance`.
    pub fn agrees_with(&self, target: f64, k: f64, allowance: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr + allowance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOutcome<const K: usize> {
    #[serde(with = "serde_arrays")]
    pub estimates: [Estimate; K],
    pub replicates: u64,
    pub redraws: u64,
}

mod serde_arrays {
    use super::Estimate;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, const K: usize>(v: &[Estimate; K], s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const K: usize>(d: D) -> Result<[Estimate; K], D::Error> {
        let v: Vec<Estimate> = Vec::deserialize(d)?;
        v.try_into()
            .map_err(|v: Vec<Estimate>| serde::de::Error::invalid_length(v.len(), &"fixed-size array"))
    }
}

/// Runs `cfg.replicates` coupled draws and estimates the means of the `K`
/// statistics returned by `stat`.
pub fn monte_carlo<const K: usize, F>(cfg: &SimConfig, stat: F) -> Result<McOutcome<K>>
where
    F: Fn(&CoupledSample) -> [f64; K] + Sync,
{
    cfg.validate()?;
    let chunks = cfg.replicates.div_ceil(CHUNK);
    let parts: Vec<([RunningStats; K], u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = [RunningStats::default(); K];
            let mut redraws = 0u64;
            let end = ((c + 1) * CHUNK).min(cfg.replicates);
            for r in c * CHUNK..end {
                let mut rng = replicate_rng(cfg.seed, r);
                let (s, k) = sample_coupled(cfg, &mut rng);
                redraws += k as u64;
                let v = if cfg.antithetic {
                    let a = stat(&s);
                    let b = stat(&s.mirrored());
                    std::array::from_fn(|i| 0.5 * (a[i] + b[i]))
                } else {
                    stat(&s)
                };
                for (st, x) in acc.iter_mut().zip(v) {
                    st.push(x);
                }
            }
            (acc, redraws)
        })
        .collect();
    let mut total = [RunningStats::default(); K];
    let mut redraws = 0;
    for (acc, k) in &parts {
        for (t, a) in total.iter_mut().zip(acc) {
            t.merge(a);
        }
        redraws += k;
    }
    Ok(McOutcome {
        estimates: total.map(|t| t.estimate()),
        replicates: cfg.replicates,
        redraws,
    })
}

/// Visits every sample in replicate order (single-threaded); used for CSV
/// output.
pub fn for_each_sample<F: FnMut(u64, &CoupledSample)>(cfg: &SimConfig, mut f: F) -> Result<u64> {
    cfg.validate()?;
    let mut redraws = 0;
    for r in 0..cfg.replicates {
        let mut rng = replicate_rng(cfg.seed, r);
        let (s, k) = sample_coupled(cfg, &mut rng);
        redraws += k as u64;
        f(r, &s);
        if cfg.antithetic {
            f(r, &s.mirrored());
        }
    }
    Ok(redraws)
}

/// Mean and standard error of `|θ_n − θ̂|`.
pub fn estimate_l1_distance(cfg: &SimConfig) -> Result<Estimate> {
    Ok(monte_carlo(cfg, |s| [(s.theta_n - s.theta_hat).abs()])?.estimates[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceVariances {
    pub var_a: Estimate,
    pub var_b: Estimate,
    pub var_c: Estimate,
    /// `E[A_n²]`, which involves the coarse grid only.
    pub second_moment_a_n: Estimate,
    pub replicates: u64,
    pub redraws: u64,
}

/// Estimates `E[(A_n−Â)²]`, `E[(B_n−B̂)²]`, `E[(C_n−Ĉ)²]` and `E[A_n²]`.
pub fn estimate_difference_variances(cfg: &SimConfig) -> Result<DifferenceVariances> {
    let out = monte_carlo(cfg, |s| {
        [
            (s.a_n - s.a_hat).powi(2),
            (s.b_n - s.b_hat).powi(2),
            (s.c_n - s.c_hat).powi(2),
            s.a_n * s.a_n,
        ]
    })?;
    let [var_a, var_b, var_c, second_moment_a_n] = out.estimates;
    Ok(DifferenceVariances {
        var_a,
        var_b,
        var_c,
        second_moment_a_n,
        replicates: out.replicates,
        redraws: out.redraws,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub fine_factor: usize,
    pub l1: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub points: Vec<RatePoint>,
    /// Least-squares slope of `ln(mean)` against `ln(n)`.
    pub slope: f64,
    pub intercept: f64,
}

/// L¹ distances for several walk lengths with a common fine-grid factor,
/// replicate count and seed, and the fitted log-log slope.
pub fn rate_experiment(ns: &[usize], fine_factor: usize, replicates: u64, seed: u64) -> Result<RateReport> {
    if ns.len() < 2 {
        return domain("the rate fit needs at least two walk lengths");
    }
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let cfg = SimConfig::new(n, fine_factor, replicates, seed);
        points.push(RatePoint {
            n,
            fine_factor,
            l1: estimate_l1_distance(&cfg)?,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.l1.mean.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(RateReport {
        points,
        slope,
        intercept,
    })
}

/// Ordinary least-squares line `y = slope·x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Closed-form second moments used as Monte Carlo oracles.
pub mod oracle {
    fn p(n: usize, k: i32) -> f64 {
        (n as f64).powi(-k)
    }

    /// `E[A_n²] = 1/90 + n^{−2}/36 − 7n^{−4}/180`.
    pub fn second_moment_a_n(n: usize) -> f64 {
        1.0 / 90.0 + p(n, 2) / 36.0 - 7.0 * p(n, 4) / 180.0
    }

    /// `E[(A_n − A)²] = (5/72) n^{−2} − (7/120) n^{−4}`.
    pub fn diff_a(n: usize) -> f64 {
        5.0 / 72.0 * p(n, 2) - 7.0 / 120.0 * p(n, 4)
    }

    /// `E[(B_n − B)²] = (5/36) n^{−2} − (4/45) n^{−4}`.
    pub fn diff_b(n: usize) -> f64 {
        5.0 / 36.0 * p(n, 2) - 4.0 / 45.0 * p(n, 4)
    }

    /// `E[B_n] = trace(K_n)/n = (n² − 1)/(6n²)`.
    pub fn mean_b_n(n: usize) -> f64 {
        let nf = n as f64;
        (nf * nf - 1.0) / (6.0 * nf * nf)
    }

    /// `E[A²] = 1/90`.
    pub const SECOND_MOMENT_A: f64 = 1.0 / 90.0;
}

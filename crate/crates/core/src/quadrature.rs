//! Adaptive Gauss–Kronrod (7–15) quadrature in one and two dimensions.
//!
//! The two-dimensional driver works on rectangles with a tensor-product
//! 15×15 Kronrod rule. Each cell carries a separate error estimate per axis
//! (Kronrod against Gauss in that axis only) so that it can be bisected in
//! the direction that needs it. Cells are kept in a vector whose order is a
//! function of the refinement history alone; children are evaluated in
//! parallel but stored and summed in that fixed order, so results do not
//! depend on the number of worker threads.

use rayon::prelude::*;

use crate::sum::NeumaierSum;

/// Positive Kronrod abscissae on `[-1, 1]`, descending; the Gauss nodes are
/// the odd-indexed entries.
pub const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

pub const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

pub const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15-point rule laid out left to right on `[-1, 1]`, with Gauss weights
/// (zero at Kronrod-only nodes).
#[derive(Debug, Clone, Copy)]
pub struct Rule15 {
    pub nodes: [f64; 15],
    pub kronrod: [f64; 15],
    pub gauss: [f64; 15],
}

const fn build_rule() -> Rule15 {
    let mut nodes = [0.0; 15];
    let mut kronrod = [0.0; 15];
    let mut gauss = [0.0; 15];
    let mut k = 0;
    while k < 8 {
        let g = if k % 2 == 1 { WG[(k - 1) / 2] } else { 0.0 };
        nodes[k] = -XGK[k];
        kronrod[k] = WGK[k];
        gauss[k] = g;
        nodes[14 - k] = XGK[k];
        kronrod[14 - k] = WGK[k];
        gauss[14 - k] = g;
        k += 1;
    }
    Rule15 { nodes, kronrod, gauss }
}

pub const RULE15: Rule15 = build_rule();

/// Nodes of the 15-point rule mapped to `[a, b]`.
#[inline]
pub fn nodes_on(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 15];
    for (xi, t) in x.iter_mut().zip(RULE15.nodes) {
        *xi = c + h * t;
    }
    x
}

/// One Gauss–Kronrod step on `[a, b]`: `(kronrod, |kronrod − gauss|)`.
pub fn gk15<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> (f64, f64) {
    let h = 0.5 * (b - a);
    let mut k = 0.0;
    let mut g = 0.0;
    for (i, x) in nodes_on(a, b).into_iter().enumerate() {
        let v = f(x);
        k += RULE15.kronrod[i] * v;
        g += RULE15.gauss[i] * v;
    }
    (k * h, ((k - g) * h).abs())
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
    pub converged: bool,
}

/// Absolute and relative targets; the run stops once the summed error
/// estimate is below `max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    #[inline]
    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// Globally adaptive bisection on a finite interval.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance, max_intervals: usize) -> QuadResult {
    let (v, e) = gk15(&mut f, a, b);
    let mut parts: Vec<(f64, f64, f64, f64)> = vec![(a, b, v, e)];
    loop {
        let value = parts.iter().map(|p| p.2).collect::<NeumaierSum>().value();
        let error = parts.iter().map(|p| p.3).collect::<NeumaierSum>().value();
        let done = error <= tol.target(value);
        if done || parts.len() >= max_intervals || !value.is_finite() {
            return QuadResult {
                value,
                abs_error: error,
                intervals: parts.len(),
                converged: done,
            };
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0usize, -1.0f64), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, _, _) = parts[idx];
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            return QuadResult {
                value,
                abs_error: error,
                intervals: parts.len(),
                converged: false,
            };
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts[idx] = (lo, mid, v1, e1);
        parts.push((mid, hi, v2, e2));
    }
}

/// Integrand evaluated on a full 15×15 tensor grid at once, so that work
/// depending on one coordinate only can be shared across a row.
pub trait TensorIntegrand: Sync {
    /// Fills `out[i][j] = f(xs[i], ys[j])`.
    fn eval_tensor(&self, xs: &[f64; 15], ys: &[f64; 15], out: &mut [[f64; 15]; 15]);
}

/// A rectangle with its tensor Kronrod value and per-axis error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub value: f64,
    pub err_x: f64,
    pub err_y: f64,
}

impl Cell {
    #[inline]
    pub fn error(&self) -> f64 {
        self.err_x + self.err_y
    }

    fn splittable(&self) -> bool {
        let mx = 0.5 * (self.x0 + self.x1);
        let my = 0.5 * (self.y0 + self.y1);
        (mx > self.x0 && mx < self.x1) || (my > self.y0 && my < self.y1)
    }
}

pub fn eval_cell<I: TensorIntegrand + ?Sized>(f: &I, x0: f64, x1: f64, y0: f64, y1: f64) -> Cell {
    let xs = nodes_on(x0, x1);
    let ys = nodes_on(y0, y1);
    let mut grid = [[0.0; 15]; 15];
    f.eval_tensor(&xs, &ys, &mut grid);
    let (wk, wg) = (&RULE15.kronrod, &RULE15.gauss);
    let mut kk = 0.0;
    let mut gk = 0.0; // Gauss in x, Kronrod in y
    let mut kg = 0.0; // Kronrod in x, Gauss in y
    for i in 0..15 {
        let mut row_k = 0.0;
        let mut row_g = 0.0;
        for j in 0..15 {
            row_k += wk[j] * grid[i][j];
            row_g += wg[j] * grid[i][j];
        }
        kk += wk[i] * row_k;
        gk += wg[i] * row_k;
        kg += wk[i] * row_g;
    }
    let area = 0.25 * (x1 - x0) * (y1 - y0);
    Cell {
        x0,
        x1,
        y0,
        y1,
        value: kk * area,
        err_x: ((kk - gk) * area).abs(),
        err_y: ((kk - kg) * area).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive2dConfig {
    pub tol: Tolerance,
    pub max_cells: usize,
    /// The square is first cut into `initial_grid²` cells.
    pub initial_grid: usize,
    /// Fraction of the total error covered by the cells split per round.
    pub split_fraction: f64,
}

impl Default for Adaptive2dConfig {
    fn default() -> Self {
        Self {
            tol: Tolerance::new(1e-14, 1e-7),
            max_cells: 2_000_000,
            initial_grid: 4,
            split_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quad2dResult {
    pub value: f64,
    pub abs_error: f64,
    pub cells: usize,
    pub converged: bool,
}

fn totals(cells: &[Cell]) -> (f64, f64) {
    let mut v = NeumaierSum::new();
    let mut e = NeumaierSum::new();
    for c in cells {
        v.add(c.value);
        e.add(c.error());
    }
    (v.value(), e.value())
}

/// Adaptive cubature of `f` over `[x0, x1] × [y0, y1]`.
pub fn integrate_2d<I: TensorIntegrand>(f: &I, x: (f64, f64), y: (f64, f64), cfg: &Adaptive2dConfig) -> Quad2dResult {
    let g = cfg.initial_grid.max(1);
    let hx = (x.1 - x.0) / g as f64;
    let hy = (y.1 - y.0) / g as f64;
    let rects: Vec<(f64, f64, f64, f64)> = (0..g * g)
        .map(|k| {
            let (i, j) = (k / g, k % g);
            let xa = x.0 + hx * i as f64;
            let xb = if i + 1 == g { x.1 } else { x.0 + hx * (i + 1) as f64 };
            let ya = y.0 + hy * j as f64;
            let yb = if j + 1 == g { y.1 } else { y.0 + hy * (j + 1) as f64 };
            (xa, xb, ya, yb)
        })
        .collect();
    let mut cells: Vec<Cell> = rects.par_iter().map(|r| eval_cell(f, r.0, r.1, r.2, r.3)).collect();

    loop {
        let (value, error) = totals(&cells);
        if error <= cfg.tol.target(value) {
            return Quad2dResult {
                value,
                abs_error: error,
                cells: cells.len(),
                converged: true,
            };
        }
        if !value.is_finite() || cells.len() >= cfg.max_cells {
            break;
        }
        let mut order: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].splittable()).collect();
        if order.is_empty() {
            break;
        }
        order.sort_by(|&a, &b| cells[b].error().total_cmp(&cells[a].error()).then(a.cmp(&b)));
        let room = cfg.max_cells - cells.len();
        let mut chosen = Vec::new();
        let mut covered = 0.0;
        for &i in &order {
            if chosen.len() >= room || (covered >= cfg.split_fraction * error && !chosen.is_empty()) {
                break;
            }
            covered += cells[i].error();
            chosen.push(i);
        }
        let children: Vec<(Cell, Cell)> = chosen
            .par_iter()
            .map(|&i| {
                let c = cells[i];
                let mx = 0.5 * (c.x0 + c.x1);
                let my = 0.5 * (c.y0 + c.y1);
                let can_x = mx > c.x0 && mx < c.x1;
                let can_y = my > c.y0 && my < c.y1;
                if can_x && (c.err_x >= c.err_y || !can_y) {
                    (eval_cell(f, c.x0, mx, c.y0, c.y1), eval_cell(f, mx, c.x1, c.y0, c.y1))
                } else {
                    (eval_cell(f, c.x0, c.x1, c.y0, my), eval_cell(f, c.x0, c.x1, my, c.y1))
                }
            })
            .collect();
        for (&i, (a, b)) in chosen.iter().zip(children) {
            cells[i] = a;
            cells.push(b);
        }
    }
    let (value, error) = totals(&cells);
    Quad2dResult {
        value,
        abs_error: error,
        cells: cells.len(),
        converged: false,
    }
}

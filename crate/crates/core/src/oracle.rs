//! Brute-force periodic-solution counter.
//!
//! Nothing here goes through the flow or half-map machinery: the displacement
//! `d(x) = u(2π, 0, x) - x` is computed with a fixed-step classical
//! Runge-Kutta scheme on the smooth field `σ a x + b` of the current sign
//! `σ`, switching fields at each located zero crossing, and half-maps are
//! solved from their integral characterization with composite Gauss-Legendre
//! quadrature. The cost is several orders of magnitude above the main
//! pipeline, which is acceptable for a reference.

use crate::flow::AbelEq;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("window [{lo}, {hi}] too small: d has one sign at both ends and is not diverging")]
    WindowTooSmall { lo: f64, hi: f64 },
    #[error("invalid oracle configuration: {0}")]
    Config(String),
}

/// 2π-periodic coefficients of `x' = a(t)|x| + b(t)`.
pub trait Coefficients: Sync {
    fn a(&self, t: f64) -> f64;
    fn b(&self, t: f64) -> f64;

    /// `(max |a|, max |b|)`. The default samples a fine grid.
    fn sup_norms(&self) -> (f64, f64) {
        let n = 4096;
        (0..n).fold((0.0f64, 0.0f64), |(ma, mb), i| {
            let t = TAU * i as f64 / n as f64;
            (ma.max(self.a(t).abs()), mb.max(self.b(t).abs()))
        })
    }
}

impl Coefficients for AbelEq {
    fn a(&self, t: f64) -> f64 {
        self.a.eval(t)
    }
    fn b(&self, t: f64) -> f64 {
        self.b.eval(t)
    }
    fn sup_norms(&self) -> (f64, f64) {
        (self.a.max_abs(), self.b.max_abs())
    }
}

/// Coefficients given as plain functions, for equations outside the
/// degree-one family.
pub struct FnCoefficients<A, B> {
    pub a: A,
    pub b: B,
}

impl<A, B> Coefficients for FnCoefficients<A, B>
where
    A: Fn(f64) -> f64 + Sync,
    B: Fn(f64) -> f64 + Sync,
{
    fn a(&self, t: f64) -> f64 {
        (self.a)(t)
    }
    fn b(&self, t: f64) -> f64 {
        (self.b)(t)
    }
}

/// `a(t) = ε cos(k t)`, `b(t) = sin t`.
pub fn cos_family(eps: f64, k: f64) -> FnCoefficients<impl Fn(f64) -> f64 + Sync, impl Fn(f64) -> f64 + Sync> {
    FnCoefficients { a: move |t: f64| eps * (k * t).cos(), b: f64::sin }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Number of sample points of `d` across the window.
    pub grid: usize,
    /// Relative bisection tolerance on roots of `d`.
    pub tol: f64,
    /// Runge-Kutta steps per period; `0` picks a count from `max |a|`.
    pub steps: usize,
    /// `|d(x)| <= continuum_tol (1 + |x|)` marks a sample as numerically zero.
    pub continuum_tol: f64,
    /// Consecutive numerically-zero samples needed to report a continuum.
    pub continuum_run: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { grid: 4096, tol: 1e-9, steps: 0, continuum_tol: 1e-8, continuum_run: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteCount {
    /// Isolated zeros of `d`, ascending.
    pub roots: Vec<f64>,
    /// Stretches where `d` vanishes to integration accuracy.
    pub continuum: Vec<(f64, f64)>,
    pub window: (f64, f64),
    pub steps: usize,
}

impl BruteCount {
    pub fn count(&self) -> usize {
        self.roots.len()
    }

    pub fn suspected_continuum(&self) -> bool {
        !self.continuum.is_empty()
    }
}

/// Half-width `2π max|b| e^{2π max|a|}` of a window containing every
/// periodic solution, floored at 1.
pub fn default_window<C: Coefficients + ?Sized>(c: &C) -> f64 {
    let (ma, mb) = c.sup_norms();
    (TAU * mb * (TAU * ma).exp()).max(1.0)
}

/// Coefficients tabulated at the Runge-Kutta stage times of a fixed grid.
struct Table<'a, C: ?Sized> {
    c: &'a C,
    h: f64,
    /// `a`, `b` at `k h / 2`, `k = 0..=2n`.
    a: Vec<f64>,
    b: Vec<f64>,
}

impl<'a, C: Coefficients + ?Sized> Table<'a, C> {
    fn new(c: &'a C, steps: usize) -> Self {
        let h = TAU / steps as f64;
        let (a, b) = (0..=2 * steps)
            .map(|k| {
                let t = 0.5 * h * k as f64;
                (c.a(t), c.b(t))
            })
            .unzip();
        Table { c, h, a, b }
    }

    /// One RK4 step of `x' = σ a x + b` of length `dt` from `t`, with
    /// coefficients either tabulated (`k` = grid index) or evaluated.
    fn rk4(&self, k: Option<usize>, t: f64, x: f64, dt: f64, sigma: f64) -> f64 {
        let (a0, b0, a1, b1, a2, b2) = match k {
            Some(k) => (
                self.a[2 * k],
                self.b[2 * k],
                self.a[2 * k + 1],
                self.b[2 * k + 1],
                self.a[2 * k + 2],
                self.b[2 * k + 2],
            ),
            None => {
                let m = t + 0.5 * dt;
                let e = t + dt;
                (self.c.a(t), self.c.b(t), self.c.a(m), self.c.b(m), self.c.a(e), self.c.b(e))
            }
        };
        let f = |a: f64, b: f64, y: f64| sigma * a * y + b;
        let k1 = f(a0, b0, x);
        let k2 = f(a1, b1, x + 0.5 * dt * k1);
        let k3 = f(a1, b1, x + 0.5 * dt * k2);
        let k4 = f(a2, b2, x + dt * k3);
        x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    }

    /// Sign of the field just after `t` for a solution sitting at zero.
    fn sign_leaving_zero(&self, t: f64) -> f64 {
        let b = self.c.b(t);
        if b != 0.0 {
            return b.signum();
        }
        let db = self.c.b(t + 1e-9) - self.c.b(t - 1e-9);
        if db >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Advance over `[t, t + dt]`, splitting at zero crossings.
    fn advance(&self, k: usize, x: f64) -> f64 {
        let t0 = self.h * k as f64;
        let sigma = if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            self.sign_leaving_zero(t0)
        };
        let y = self.rk4(Some(k), t0, x, self.h, sigma);
        if y * sigma >= 0.0 {
            return y;
        }
        self.advance_split(t0, x, self.h, sigma, 0)
    }

    fn advance_split(&self, t: f64, x: f64, dt: f64, sigma: f64, depth: usize) -> f64 {
        let y = self.rk4(None, t, x, dt, sigma);
        if y * sigma >= 0.0 || depth > 8 {
            return y;
        }
        // Crossing time of the smooth-field step, by bisection on its length.
        let (mut lo, mut hi) = (0.0, dt);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.rk4(None, t, x, mid, sigma) * sigma > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tc = t + hi;
        let rest = dt - hi;
        if rest <= 0.0 {
            return 0.0;
        }
        let next = self.sign_leaving_zero(tc);
        self.advance_split(tc, 0.0, rest, next, depth + 1)
    }

    fn displacement(&self, x0: f64) -> f64 {
        let n = self.a.len() / 2;
        let mut x = x0;
        for k in 0..n {
            x = self.advance(k, x);
        }
        x - x0
    }
}

fn steps_for<C: Coefficients + ?Sized>(c: &C, cfg: &OracleConfig) -> usize {
    if cfg.steps > 0 {
        return cfg.steps;
    }
    let (ma, _) = c.sup_norms();
    // Keep h·max|a| near 0.01; the local error then sits near 1e-12 relative.
    ((TAU * ma / 0.01).ceil() as usize).clamp(2048, 8192)
}

/// `u(2π, 0, x) - x` by the oracle integrator.
pub fn brute_displacement<C: Coefficients + ?Sized>(c: &C, x: f64, steps: usize) -> f64 {
    Table::new(c, steps).displacement(x)
}

/// Zeros of the displacement on `[-w, w]` (default: [`default_window`]).
///
/// Samples are equispaced in `asinh(x / s)` with `s = max(max|b|, 1e-3)`,
/// so both the neighbourhood of zero and the far ends of a wide window are
/// resolved.
pub fn brute_count<C: Coefficients + ?Sized>(
    c: &C,
    window: Option<f64>,
    cfg: &OracleConfig,
) -> Result<BruteCount, OracleError> {
    if cfg.grid < 8 || !(cfg.tol > 0.0) {
        return Err(OracleError::Config(format!("grid {} tol {}", cfg.grid, cfg.tol)));
    }
    let natural = default_window(c);
    let w = window.unwrap_or(natural);
    if !(w > 0.0) || !w.is_finite() {
        return Err(OracleError::Config(format!("window half-width {w}")));
    }
    let steps = steps_for(c, cfg);
    let table = Table::new(c, steps);
    let s = c.sup_norms().1.max(1e-3);
    let u = (w / s).asinh();
    let mut xs: Vec<f64> = (0..cfg.grid)
        .map(|i| s * (-u + 2.0 * u * i as f64 / (cfg.grid - 1) as f64).sinh())
        .collect();
    xs.push(0.0);
    xs.sort_by(|p, q| p.total_cmp(q));
    xs.dedup();
    let ds: Vec<f64> = xs.par_iter().map(|&x| table.displacement(x)).collect();

    let small = |x: f64, d: f64| d.abs() <= cfg.continuum_tol * (1.0 + x.abs());
    // Runs of numerically-zero samples.
    let mut in_run = vec![false; xs.len()];
    let mut continuum = Vec::new();
    let mut i = 0;
    while i < xs.len() {
        if !small(xs[i], ds[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < xs.len() && small(xs[i], ds[i]) {
            i += 1;
        }
        if i - start >= cfg.continuum_run {
            continuum.push((xs[start], xs[i - 1]));
            in_run[start..i].iter_mut().for_each(|f| *f = true);
        }
    }

    let mut roots = Vec::new();
    for i in 0..xs.len() {
        if in_run[i] {
            continue;
        }
        if ds[i] == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if i + 1 < xs.len() && !in_run[i + 1] && ds[i + 1] != 0.0 && ds[i].signum() != ds[i + 1].signum() {
            roots.push(bisect(&table, xs[i], xs[i + 1], ds[i], cfg.tol));
        }
    }

    let n = xs.len();
    let ends_same_sign = ds[0] != 0.0 && ds[0].signum() == ds[n - 1].signum();
    let diverging = ds[0].abs() > ds[1].abs() && ds[n - 1].abs() > ds[n - 2].abs();
    if window.is_some() && w < natural && ends_same_sign && !diverging {
        return Err(OracleError::WindowTooSmall { lo: -w, hi: w });
    }
    Ok(BruteCount { roots, continuum, window: (-w, w), steps })
}

fn bisect<C: Coefficients + ?Sized>(table: &Table<'_, C>, mut lo: f64, mut hi: f64, dlo: f64, tol: f64) -> f64 {
    let slo = dlo.signum();
    while hi - lo > tol * (1.0 + lo.abs().min(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let d = table.displacement(mid);
        if d == 0.0 {
            return mid;
        }
        if d.signum() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// Eight-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite eight-point Gauss-Legendre quadrature on `panels` equal panels.
pub fn gauss_composite<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let w = (hi - lo) / panels as f64;
    let half = 0.5 * w;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * w;
        let mut s = 0.0;
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            s += wt * (f(mid - half * x) + f(mid + half * x));
        }
        sum += s * half;
    }
    sum
}

/// Panels used by [`brute_half_map`]; the integrands are entire, so this is
/// far past the point of convergence.
const HALF_MAP_PANELS: usize = 48;

/// Half-map from its integral characterization, solved for the second time
/// by bisection. `eq` must be normalized and `t1 ∈ (0, t̄)`.
///
/// * plus: `∫_{t1}^{T} b(t) e^{-A(t)} dt = 0`, the zero of `x > 0` started at `t1`;
/// * minus: `∫_{T}^{t1+2π} b(t) e^{A(t)} dt = 0`, where the negative excursion
///   ending at `t1 + 2π` began;
///
/// with `A(t) = ∫_0^t a`. Both integrals are monotone in `T` on `(t̄, 2π)`,
/// so a root exists exactly when the value at the far end has the other sign.
pub fn brute_half_map(eq: &AbelEq, t1: f64, side: crate::poincare::Side) -> Option<f64> {
    use crate::poincare::Side;
    let tbar = eq.tbar()?;
    if !(t1 > 0.0 && t1 < tbar) {
        return None;
    }
    let prim = |t: f64| eq.a.integrate(0.0, t);
    let value = |tt: f64| -> f64 {
        match side {
            Side::Plus => gauss_composite(|s| eq.b.eval(s) * (-prim(s)).exp(), t1, tt, HALF_MAP_PANELS),
            Side::Minus => gauss_composite(|s| eq.b.eval(s) * prim(s).exp(), tt, t1 + TAU, HALF_MAP_PANELS),
        }
    };
    // Plus decreases in T past t̄ and is positive there; minus increases and
    // is positive at 2π.
    let (mut lo, mut hi) = (tbar, TAU);
    let (v_lo, v_hi) = (value(lo), value(hi));
    let has_root = match side {
        Side::Plus => v_lo > 0.0 && v_hi < 0.0,
        Side::Minus => v_lo < 0.0 && v_hi > 0.0,
    };
    if !has_root {
        return None;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = value(mid);
        if v.signum() == v_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    (root > tbar && root < TAU).then_some(root)
}

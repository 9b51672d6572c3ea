//! Geometry of the tangency reduction: the curves `h = 0` and `m = 0`, the
//! function `k = ā/b` and its derivative numerator `n`, the rational model
//! obtained from `t = 2·atan(z1) + π`, `x = 2·atan(z2) + π`, and the
//! tangency system `f = g = 0`.
//!
//! Everything except [`h_eval`] and [`m_eval`] works in the normalized frame
//! `b(t) = sin t + b0 (1 - cos t)`, `a(t) = a0 (1 + r1 cos t + r2 sin t)`.

use crate::flow::AbelEq;
use crate::realroots::{isolate_at, resultant, BiPoly, Eliminate, RootError, UniPoly, XFloat};
use crate::trigpoly::{tbar_of, TrigError};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("a0 = 0: the curve reduction needs a nonzero mean of a")]
    A0Zero,
    #[error("cannot normalize b: {0}")]
    Normalize(#[from] TrigError),
    #[error("|b(t)| < 1e-12 at t = {t}")]
    DivisionNearZero { t: f64 },
    #[error("no solution of the h = 0 branch equation for z1 = {z1}")]
    OutOfRange { z1: f64 },
    #[error("m vanishes on a whole grid cell; parameters look non-generic")]
    DegenerateCurve,
}

/// The reduced parameters `(a0, r1, r2, b0)` and `c = e^{π a0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub a0: f64,
    pub r1: f64,
    pub r2: f64,
    pub b0: f64,
    pub c: f64,
}

impl CurveParams {
    /// Normalize `eq` if needed and read off the reduced parameters.
    pub fn from_eq(eq: &AbelEq) -> Result<Self, CurveError> {
        let (a, b0) = if eq.is_normalized() {
            (eq.a, eq.b.c0)
        } else {
            let nf = eq.normalize()?;
            (nf.a, nf.b0)
        };
        if a.c0 == 0.0 {
            return Err(CurveError::A0Zero);
        }
        Ok(CurveParams::new(a.c0, a.c1 / a.c0, a.c2 / a.c0, b0))
    }

    pub fn new(a0: f64, r1: f64, r2: f64, b0: f64) -> Self {
        CurveParams { a0, r1, r2, b0, c: (PI * a0).exp() }
    }

    /// The normalized equation these parameters describe.
    pub fn equation(&self) -> AbelEq {
        AbelEq::from_coeffs([self.a0, self.a0 * self.r1, self.a0 * self.r2], [self.b0, -self.b0, 1.0])
    }

    pub fn tbar(&self) -> f64 {
        tbar_of(self.b0)
    }

    pub fn abar(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        1.0 + self.r1 * c + self.r2 * s
    }

    pub fn abar_prime(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        -self.r1 * s + self.r2 * c
    }

    pub fn b(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        s + self.b0 * (1.0 - c)
    }

    pub fn b_prime(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        c + self.b0 * s
    }

    /// `n(t) = (b0 r1 + b0) sin t + (1 - b0 r2) cos t + b0 r2 + r1`.
    pub fn n(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        let (r1, r2, b0) = (self.r1, self.r2, self.b0);
        (b0 * r1 + b0) * s + (1.0 - b0 * r2) * c + b0 * r2 + r1
    }

    pub fn n_prime(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        let (r1, r2, b0) = (self.r1, self.r2, self.b0);
        (b0 * r1 + b0) * c - (1.0 - b0 * r2) * s
    }

    /// `m / a0 = ā(t) b(x) - ā(x) b(t) c`.
    pub fn mbar(&self, t: f64, x: f64) -> f64 {
        self.abar(t) * self.b(x) - self.abar(x) * self.b(t) * self.c
    }

    pub fn mbar_grad(&self, t: f64, x: f64) -> (f64, f64) {
        (
            self.abar_prime(t) * self.b(x) - self.c * self.abar(x) * self.b_prime(t),
            self.abar(t) * self.b_prime(x) - self.c * self.abar_prime(x) * self.b(t),
        )
    }

    /// `n(t) b(x)³ - n(x) b(t)³ c²`.
    pub fn tangency(&self, t: f64, x: f64) -> f64 {
        let c2 = self.c * self.c;
        self.n(t) * self.b(x).powi(3) - self.n(x) * self.b(t).powi(3) * c2
    }

    pub fn tangency_grad(&self, t: f64, x: f64) -> (f64, f64) {
        let c2 = self.c * self.c;
        let (bt, bx) = (self.b(t), self.b(x));
        (
            self.n_prime(t) * bx.powi(3) - 3.0 * c2 * self.n(x) * bt * bt * self.b_prime(t),
            3.0 * self.n(t) * bx * bx * self.b_prime(x) - c2 * self.n_prime(x) * bt.powi(3),
        )
    }

    /// `h / a0` in the normalized frame.
    pub fn hbar(&self, t: f64, x: f64) -> f64 {
        let (r1, r2) = (self.r1, self.r2);
        2.0 * (r1 * x.sin() - r2 * x.cos() + x - r1 * t.sin() + r2 * t.cos() - t) - TAU
    }

    /// Largest relative 2×2 minor of
    /// `[[-ā(t), b(t) c, k'(t)], [ā(x), -b(x), -k'(x) c]]`, with `k'`
    /// multiplied through by `b(t)² b(x)²` to stay finite near zeros of `b`.
    pub fn minor_residual(&self, t: f64, x: f64) -> f64 {
        let (bt, bx) = (self.b(t), self.b(x));
        let w = bt * bt * bx * bx;
        let row1 = [-self.abar(t) * w, bt * self.c * w, -self.n(t) * bx * bx];
        let row2 = [self.abar(x) * w, -bx * w, self.n(x) * self.c * bt * bt];
        let n1 = row1.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n2 = row2.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = (n1 * n2).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            worst = worst.max((row1[i] * row2[j] - row1[j] * row2[i]).abs() / scale);
        }
        worst
    }
}

/// `h(t, x) = 2 ∫_t^x a - 2π a0`, on the equation as given.
pub fn h_eval(eq: &AbelEq, t: f64, x: f64) -> f64 {
    let a = &eq.a;
    2.0 * (a.c0 * (x - t) + a.c1 * (x.sin() - t.sin()) - a.c2 * (x.cos() - t.cos())) - TAU * a.c0
}

/// `m(t, x) = a(t) b(x) - a(x) b(t) e^{π a0}`, on the equation as given.
pub fn m_eval(eq: &AbelEq, t: f64, x: f64) -> f64 {
    eq.a.eval(t) * eq.b.eval(x) - eq.a.eval(x) * eq.b.eval(t) * eq.c()
}

/// Harmonic expansion of `2 m / a0` in the normalized frame.
///
/// The `cos(x+t)` coefficient is `(c-1)(b0 r1 + r2)` and the `sin(x-t)`
/// coefficient is `(c+1)(r1 + b0 r2)`; both were fixed by matching the
/// direct definition.
pub fn m_harmonic(p: &CurveParams, t: f64, x: f64) -> f64 {
    let (r1, r2, b0, c) = (p.r1, p.r2, p.b0, p.c);
    (c - 1.0) * (b0 * r2 - r1) * (x + t).sin()
        + (c - 1.0) * (b0 * r1 + r2) * (x + t).cos()
        + (c + 1.0) * (r1 + b0 * r2) * (x - t).sin()
        + (c - 1.0) * (b0 * r1 - r2) * (x - t).cos()
        + 2.0 * (b0 * r2 - c) * t.sin()
        + 2.0 * b0 * (r1 + c) * t.cos()
        - 2.0 * (c * b0 * r2 - 1.0) * x.sin()
        - 2.0 * b0 * (c * r1 + 1.0) * x.cos()
        - 2.0 * (c - 1.0) * b0
}

/// `n(t)` for the normalized form of `eq`.
pub fn n_eval(eq: &AbelEq, t: f64) -> Result<f64, CurveError> {
    Ok(CurveParams::from_eq(eq)?.n(t))
}

/// `k(t) = ā(t) / b(t)` for the normalized form of `eq`.
pub fn k_eval(eq: &AbelEq, t: f64) -> Result<f64, CurveError> {
    let p = CurveParams::from_eq(eq)?;
    let b = p.b(t);
    if b.abs() < 1e-12 {
        return Err(CurveError::DivisionNearZero { t });
    }
    Ok(p.abar(t) / b)
}

/// The `z2 ∈ (0, 2π)` on `h = 0` for a given `z1 = t + x`, where `z2 = x - t`.
///
/// The left side `(π - z2)/sin(z2/2)` decreases strictly from `+∞` to `-∞`
/// on `(0, 2π)`, so bisection on it always brackets the unique solution.
pub fn h_zero_branch(eq: &AbelEq, z1: f64) -> Result<f64, CurveError> {
    let p = CurveParams::from_eq(eq)?;
    h_zero_branch_params(&p, z1)
}

pub fn h_zero_branch_params(p: &CurveParams, z1: f64) -> Result<f64, CurveError> {
    let rhs = 2.0 * (p.r1 * (0.5 * z1).cos() + p.r2 * (0.5 * z1).sin());
    if !rhs.is_finite() {
        return Err(CurveError::OutOfRange { z1 });
    }
    // Residual in a form that stays finite at the ends: (π - z2) - rhs·sin(z2/2).
    let f = |z2: f64| (PI - z2) - rhs * (0.5 * z2).sin();
    let (mut lo, mut hi) = (0.0f64, TAU);
    if f(lo) <= 0.0 || f(hi) >= 0.0 {
        return Err(CurveError::OutOfRange { z1 });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Samples `(t, x)` of the `h = 0` curve for `z1` across `(t̄, t̄ + 2π)`.
pub fn h_branch_samples(p: &CurveParams, n: usize) -> Vec<(f64, f64)> {
    let tb = p.tbar();
    (1..n)
        .filter_map(|i| {
            let z1 = tb + TAU * i as f64 / n as f64;
            let z2 = h_zero_branch_params(p, z1).ok()?;
            Some((0.5 * (z1 - z2), 0.5 * (z1 + z2)))
        })
        .collect()
}

/// `t = 2·atan(z) + π`.
pub fn angle_of(z: f64) -> f64 {
    2.0 * z.atan() + PI
}

/// Inverse of [`angle_of`] on `(0, 2π)`.
pub fn z_of(t: f64) -> f64 {
    (0.5 * (t - PI)).tan()
}

/// `(1 + r1) ∓ ...`: the factor `(r1+1)((r1+1) b0² - 2 b0 r2 - r1 + 1)`,
/// zero exactly when `ā` and `b` share a zero.
pub fn common_zero_discriminant(r1: f64, r2: f64, b0: f64) -> f64 {
    (r1 + 1.0) * ((r1 + 1.0) * b0 * b0 - 2.0 * b0 * r2 - r1 + 1.0)
}

/// `min_t ā(t)² + b(t)²`: a dense scan, then golden-section search in every
/// cell around a local minimum of the scan. Refining only the best sample
/// is not enough; a shallow minimum can beat a sharp zero on the grid.
pub fn common_zero_gap(p: &CurveParams) -> f64 {
    let f = |t: f64| p.abar(t).powi(2) + p.b(t).powi(2);
    let n = 720;
    let h = TAU / n as f64;
    let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
    let mut best = vals.iter().copied().fold(f64::INFINITY, f64::min);
    for i in 0..n {
        let (prev, next) = (vals[(i + n - 1) % n], vals[(i + 1) % n]);
        if vals[i] <= prev && vals[i] <= next {
            let t = i as f64 * h;
            best = best.min(golden_section(&f, t - h, t + h));
        }
    }
    best
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// `f` (degree 3) and `g` (degree ≤ 9) with `2f / ((1+z1²)(1+z2²)) = m/a0`
/// and `g / ((1+z1²)³(1+z2²)³) = n(t) b(x)³ - n(x) b(t)³ c²`.
#[derive(Debug, Clone)]
pub struct RationalModel {
    pub params: CurveParams,
    pub f: BiPoly,
    pub g: BiPoly,
    pub prec: usize,
}

impl RationalModel {
    /// `m/a0` recovered from `f`.
    pub fn mbar_from_f(&self, z1: f64, z2: f64) -> f64 {
        2.0 * self.f.eval_f64(z1, z2) / ((1.0 + z1 * z1) * (1.0 + z2 * z2))
    }

    pub fn tangency_from_g(&self, z1: f64, z2: f64) -> f64 {
        self.g.eval_f64(z1, z2) / ((1.0 + z1 * z1) * (1.0 + z2 * z2)).powi(3)
    }
}

pub fn rational_model(eq: &AbelEq) -> Result<RationalModel, CurveError> {
    Ok(rational_model_params(&CurveParams::from_eq(eq)?, crate::realroots::PREC_DEFAULT))
}

pub fn rational_model_params(p: &CurveParams, prec: usize) -> RationalModel {
    let x = |v: f64| XFloat::from_f64(v, prec);
    let one = XFloat::one(prec);
    let two = x(2.0);
    let (r1, r2, b0) = (x(p.r1), x(p.r2), x(p.b0));
    let c = (&XFloat::pi(prec) * &x(p.a0)).exp();
    let r1p = &r1 + &one;
    let r1m = &r1 - &one;
    let cm = &c - &one;

    // f, term by term from the closed form.
    let mut f = vec![vec![XFloat::zero(prec); 3]; 3];
    f[2][1] = -&r1p;
    f[1][2] = &c * &r1p;
    f[2][0] = &b0 * &r1p;
    f[1][1] = -(&(&two * &cm) * &r2);
    f[0][2] = -(&(&b0 * &c) * &r1p);
    f[1][0] = -(&(&(&two * &b0) * &r2) + &(&c * &r1m));
    f[0][1] = &(&(&(&two * &b0) * &c) * &r2) + &r1m;
    f[0][0] = &(&b0 * &cm) * &r1m;
    let f = BiPoly::from_xfloat(f, prec);

    // n, b and 1 + z² after the substitution, as polynomials in z.
    let n0 = &(&b0 * &r2) + &r1;
    let n1 = &one - &(&b0 * &r2);
    let n2 = &b0 * &r1p;
    let ncoef = [&n0 - &n1, -(&two * &n2), &n0 + &n1];
    let bcoef = [&two * &b0, -two.clone()];
    let qcoef = [one.clone(), XFloat::zero(prec), one.clone()];
    let n_1 = BiPoly::in_z1(&ncoef, prec);
    let n_2 = BiPoly::in_z2(&ncoef, prec);
    let b_1 = BiPoly::in_z1(&bcoef, prec);
    let b_2 = BiPoly::in_z2(&bcoef, prec);
    let q_1 = BiPoly::in_z1(&qcoef, prec);
    let q_2 = BiPoly::in_z2(&qcoef, prec);
    let left = n_1.mul(&b_2.pow(3)).mul(&q_1.pow(2));
    let right = n_2.mul(&b_1.pow(3)).mul(&q_2.pow(2)).scale(&(&c * &c));
    let g = left.sub(&right);
    RationalModel { params: *p, f, g, prec }
}

/// Sign-grid contour of `m = 0` on `(0, 2π)²`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Contour {
    pub grid: usize,
    /// One polyline per connected component, vertices on the curve.
    pub components: Vec<Polyline>,
    /// Saddle cells resolved by the centre value.
    pub saddle_cells: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

impl Contour {
    pub fn count(&self) -> usize {
        self.components.len()
    }

    /// Distance from `(t, x)` to the nearest polyline segment.
    pub fn distance_to(&self, t: f64, x: f64) -> f64 {
        let mut best = f64::INFINITY;
        for pl in &self.components {
            let pts = &pl.points;
            let n = pts.len();
            let segs = if pl.closed { n } else { n.saturating_sub(1) };
            for i in 0..segs {
                let (p, q) = (pts[i], pts[(i + 1) % n]);
                best = best.min(seg_dist(p, q, (t, x)));
            }
            if n == 1 {
                best = best.min(((pts[0].0 - t).powi(2) + (pts[0].1 - x).powi(2)).sqrt());
            }
        }
        best
    }
}

fn seg_dist(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> f64 {
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    let l2 = dx * dx + dy * dy;
    let s = if l2 == 0.0 { 0.0 } else { (((r.0 - p.0) * dx + (r.1 - p.1) * dy) / l2).clamp(0.0, 1.0) };
    let (cx, cy) = (p.0 + s * dx, p.1 + s * dy);
    ((r.0 - cx).powi(2) + (r.1 - cy).powi(2)).sqrt()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Number of connected components of `m = 0` in `(0, 2π)²`.
pub fn count_components_m(eq: &AbelEq, grid: usize) -> Result<usize, CurveError> {
    Ok(contour_m(&CurveParams::from_eq(eq)?, grid, false)?.count())
}

/// Marching-squares contour of `m/a0` on a `grid × grid` cell lattice over
/// `(0, 2π)²`. Crossing points are located on cell edges to full precision.
/// With `refine` set, polylines are densified until every chord midpoint
/// lies within `1e-8` of the curve.
pub fn contour_m(p: &CurveParams, grid: usize, refine: bool) -> Result<Contour, CurveError> {
    let n = grid.max(4);
    let h = TAU / n as f64;
    let nodes = n + 1;
    let coord = |i: usize| i as f64 * h;
    let ab: Vec<(f64, f64)> = (0..nodes).map(|i| (p.abar(coord(i)), p.b(coord(i)))).collect();
    // v[i][j] = m̄(t_i, x_j)
    let val = |i: usize, j: usize| ab[i].0 * ab[j].1 - ab[j].0 * ab[i].1 * p.c;
    let mut v = vec![0.0; nodes * nodes];
    let mut vmax: f64 = 0.0;
    for i in 0..nodes {
        for j in 0..nodes {
            let m = val(i, j);
            v[i * nodes + j] = m;
            vmax = vmax.max(m.abs());
        }
    }
    let flat = 1e-13 * vmax.max(1.0);
    let pos = |m: f64| m >= 0.0;

    // Edge ids: horizontal edges (i..i+1, j) then vertical edges (i, j..j+1).
    let hid = |i: usize, j: usize| i * nodes + j;
    let vid = |i: usize, j: usize| n * nodes + i * n + j;
    let total = n * nodes + nodes * n;
    let crossed = |e: usize| -> bool {
        if e < n * nodes {
            let (i, j) = (e / nodes, e % nodes);
            pos(v[i * nodes + j]) != pos(v[(i + 1) * nodes + j])
        } else {
            let k = e - n * nodes;
            let (i, j) = (k / n, k % n);
            pos(v[i * nodes + j]) != pos(v[i * nodes + j + 1])
        }
    };

    let mut uf = UnionFind::new(total);
    let mut links: Vec<(usize, usize)> = Vec::new();
    let mut saddle_cells = 0;
    for i in 0..n {
        for j in 0..n {
            let c = [v[i * nodes + j], v[(i + 1) * nodes + j], v[(i + 1) * nodes + j + 1], v[i * nodes + j + 1]];
            if c.iter().all(|m| m.abs() < flat) {
                return Err(CurveError::DegenerateCurve);
            }
            // Edges around the cell: bottom (x = x_j), right (t = t_{i+1}),
            // top (x = x_{j+1}), left (t = t_i).
            let edges = [hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)];
            let cut: Vec<usize> = edges.iter().copied().filter(|&e| crossed(e)).collect();
            match cut.len() {
                2 => links.push((cut[0], cut[1])),
                4 => {
                    saddle_cells += 1;
                    let centre = p.mbar(coord(i) + 0.5 * h, coord(j) + 0.5 * h);
                    if pos(centre) == pos(c[0]) {
                        // Corner 0 and corner 2 connect through the centre.
                        links.push((edges[0], edges[1]));
                        links.push((edges[2], edges[3]));
                    } else {
                        links.push((edges[3], edges[0]));
                        links.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    for &(a, b) in &links {
        uf.union(a, b);
    }

    // Chain the links into polylines.
    let mut adj: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
    for &(a, b) in &links {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut ids: Vec<usize> = adj.keys().copied().collect();
    ids.sort_unstable();
    let point = |e: usize| -> (f64, f64) {
        let (p0, p1) = if e < n * nodes {
            let (i, j) = (e / nodes, e % nodes);
            ((coord(i), coord(j)), (coord(i + 1), coord(j)))
        } else {
            let k = e - n * nodes;
            let (i, j) = (k / n, k % n);
            ((coord(i), coord(j)), (coord(i), coord(j + 1)))
        };
        edge_root(p, p0, p1)
    };
    let mut seen = std::collections::HashSet::new();
    let mut components = Vec::new();
    // Open chains start at nodes of degree one (the domain boundary).
    let starts: Vec<usize> = ids.iter().copied().filter(|e| adj[e].len() == 1).chain(ids.iter().copied()).collect();
    for s in starts {
        if seen.contains(&s) {
            continue;
        }
        let mut chain = vec![s];
        seen.insert(s);
        let mut prev = usize::MAX;
        let mut cur = s;
        let closed;
        loop {
            let next = adj[&cur].iter().copied().find(|&x| x != prev && !seen.contains(&x));
            match next {
                Some(nx) => {
                    seen.insert(nx);
                    chain.push(nx);
                    prev = cur;
                    cur = nx;
                }
                None => {
                    closed = chain.len() > 2 && adj[&cur].contains(&s);
                    break;
                }
            }
        }
        let mut pts: Vec<(f64, f64)> = chain.iter().map(|&e| point(e)).collect();
        if refine {
            pts = densify(p, &pts, closed);
        }
        components.push(Polyline { points: pts, closed });
    }
    debug_assert_eq!(
        components.len(),
        {
            let mut roots: Vec<usize> = ids.iter().map(|&e| uf.find(e)).collect();
            roots.sort_unstable();
            roots.dedup();
            roots.len()
        },
        "chains and union-find disagree"
    );
    Ok(Contour { grid: n, components, saddle_cells })
}

/// Zero of `m̄` on the segment `p0 → p1` (a sign change is assumed).
fn edge_root(p: &CurveParams, p0: (f64, f64), p1: (f64, f64)) -> (f64, f64) {
    let at = |s: f64| (p0.0 + s * (p1.0 - p0.0), p0.1 + s * (p1.1 - p0.1));
    let f = |s: f64| {
        let (t, x) = at(s);
        p.mbar(t, x)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return at(0.0);
    }
    if fhi == 0.0 {
        return at(1.0);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm >= 0.0) == (flo >= 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    at(0.5 * (lo + hi))
}

/// Project a point onto `m̄ = 0` by Newton steps along the gradient.
fn project(p: &CurveParams, mut q: (f64, f64)) -> (f64, f64) {
    for _ in 0..8 {
        let m = p.mbar(q.0, q.1);
        let (gt, gx) = p.mbar_grad(q.0, q.1);
        let g2 = gt * gt + gx * gx;
        if g2 == 0.0 {
            break;
        }
        let step = (m * gt / g2, m * gx / g2);
        q = (q.0 - step.0, q.1 - step.1);
        if step.0.abs() + step.1.abs() < 1e-15 {
            break;
        }
    }
    q
}

fn densify(p: &CurveParams, pts: &[(f64, f64)], closed: bool) -> Vec<(f64, f64)> {
    fn rec(p: &CurveParams, a: (f64, f64), b: (f64, f64), depth: u32, out: &mut Vec<(f64, f64)>) {
        let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
        let on = project(p, mid);
        let dev = ((on.0 - mid.0).powi(2) + (on.1 - mid.1).powi(2)).sqrt();
        let inside = on.0 > 0.0 && on.0 < TAU && on.1 > 0.0 && on.1 < TAU;
        if depth > 0 && dev > 1e-8 && inside {
            rec(p, a, on, depth - 1, out);
            out.push(on);
            rec(p, on, b, depth - 1, out);
        }
    }
    let mut out = Vec::with_capacity(pts.len() * 4);
    let n = pts.len();
    for i in 0..n {
        out.push(pts[i]);
        if i + 1 < n {
            rec(p, pts[i], pts[i + 1], 12, &mut out);
        } else if closed && n > 1 {
            rec(p, pts[i], pts[0], 12, &mut out);
        }
    }
    out
}

/// A solution of the tangency system in the normalized frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub x: f64,
    /// `|h/a0|` at the point (informative; tangency points need not lie on `h = 0`).
    pub h_residual: f64,
    /// `|m/a0|`.
    pub m_residual: f64,
    /// Largest relative 2×2 minor of the proportionality matrix.
    pub minor_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TangencyMethod {
    Elimination,
    NewtonGrid,
}

/// Why an input was judged non-generic (empty when generic).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Genericity {
    pub small_a0: bool,
    pub small_discriminant: bool,
    pub clustered_roots: bool,
}

impl Genericity {
    pub fn is_generic(&self) -> bool {
        !(self.small_a0 || self.small_discriminant || self.clustered_roots)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TangencyReport {
    pub params: CurveParams,
    /// Solutions strictly inside the region `0 < x - t < 2π`,
    /// `t̄ < t + x < t̄ + 2π` (margin `1e-9`), sorted by `t`.
    pub points: Vec<CurvePoint>,
    /// Solutions within the margin of the region boundary; never counted.
    pub boundary: Vec<CurvePoint>,
    pub resultant_degree: usize,
    /// Real roots of the resultant (after removing the spurious `z1 = b0`).
    pub resultant_real_roots: usize,
    pub spurious_multiplicity: usize,
    pub precision_bits: usize,
    pub method: TangencyMethod,
    pub genericity: Genericity,
    /// Elimination failed at every precision; points come from the grid fallback.
    pub partial: bool,
}

impl TangencyReport {
    pub fn count(&self) -> usize {
        self.points.len()
    }
}

const REGION_MARGIN: f64 = 1e-9;

enum Membership {
    Interior,
    Boundary,
    Outside,
}

fn region(p: &CurveParams, t: f64, x: f64) -> Membership {
    let tb = p.tbar();
    let (d, s) = (x - t, x + t);
    let gaps = [d, TAU - d, s - tb, tb + TAU - s, t, TAU - t, x, TAU - x];
    let worst = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    if worst > REGION_MARGIN {
        Membership::Interior
    } else if worst >= -REGION_MARGIN {
        Membership::Boundary
    } else {
        Membership::Outside
    }
}

/// Newton on `(m̄, n b³ - n b³ c²)` in `(t, x)`. Only converged iterates
/// with both residuals small relative to the size of their terms are
/// returned, and points where `b(t) = b(x) = 0` are rejected: there both
/// equations vanish identically in the `b` factors (the image of the
/// spurious common zero `z1 = z2 = b0` and its limits at infinity).
fn newton_tangency(p: &CurveParams, mut t: f64, mut x: f64) -> Option<(f64, f64)> {
    let mut converged = false;
    for _ in 0..80 {
        let f1 = p.mbar(t, x);
        let f2 = p.tangency(t, x);
        let (a, b) = p.mbar_grad(t, x);
        let (c, d) = p.tangency_grad(t, x);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dt = (f1 * d - f2 * b) / det;
        let dx = (a * f2 - c * f1) / det;
        // Damp large steps so iterates stay in the period square.
        let s = (0.5 / dt.abs().max(dx.abs())).min(1.0);
        t -= s * dt;
        x -= s * dx;
        if !(t.is_finite() && x.is_finite()) || t < -1.0 || t > TAU + 1.0 || x < -1.0 || x > TAU + 1.0 {
            return None;
        }
        if dt.abs().max(dx.abs()) < 1e-13 {
            converged = true;
            break;
        }
    }
    if !converged || on_spurious_locus(p, t, x) {
        return None;
    }
    solves_system(p, t, x, 1e-10, 1e-8).then_some((t, x))
}

/// `m = 0` and the tangency equation hold relative to the size of their
/// two terms. The polynomial residuals are useless for this near `b = 0`,
/// where the expanded coefficients cancel heavily.
fn solves_system(p: &CurveParams, t: f64, x: f64, m_tol: f64, g_tol: f64) -> bool {
    let (bt, bx) = (p.b(t).abs(), p.b(x).abs());
    let scale_m = p.abar(t).abs() * bx + p.c * p.abar(x).abs() * bt;
    let scale_g = p.n(t).abs() * bx.powi(3) + p.c * p.c * p.n(x).abs() * bt.powi(3);
    p.mbar(t, x).abs() <= m_tol * scale_m.max(1e-300) && p.tangency(t, x).abs() <= g_tol * scale_g.max(1e-300)
}

/// Both `b(t)` and `b(x)` vanish (to `1e-6`).
fn on_spurious_locus(p: &CurveParams, t: f64, x: f64) -> bool {
    p.b(t).abs() < 1e-6 && p.b(x).abs() < 1e-6
}

fn curve_point(p: &CurveParams, t: f64, x: f64) -> CurvePoint {
    CurvePoint {
        t,
        x,
        h_residual: p.hbar(t, x).abs(),
        m_residual: p.mbar(t, x).abs(),
        minor_residual: p.minor_residual(t, x),
    }
}

fn dedup_points(mut pts: Vec<(f64, f64)>, tol: f64) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for q in pts {
        if !out.iter().any(|r| (r.0 - q.0).abs() < tol && (r.1 - q.1).abs() < tol) {
            out.push(q);
        }
    }
    out
}

/// Solutions of the tangency system found by Newton iteration from an
/// `n × n` grid of starting points over `(0, 2π)²`. Used as an independent
/// check of [`solve_tangency`] and as its fallback.
pub fn tangency_newton_grid(p: &CurveParams, n: usize) -> Vec<(f64, f64)> {
    let h = TAU / n as f64;
    let mut found = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (t0, x0) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            if let Some((t, x)) = newton_tangency(p, t0, x0) {
                if t > 0.0 && t < TAU && x > 0.0 && x < TAU {
                    found.push((t, x));
                }
            }
        }
    }
    dedup_points(found, 1e-7)
}

/// Precisions tried by the elimination pipeline, in order.
pub const PRECISIONS: [usize; 3] = [128, 256, 512];

/// Isolated solutions of `m = 0`, `n(t) b(x)³ - n(x) b(t)³ c² = 0` in the
/// region, via the resultant in `z1`, Sturm isolation, back-substitution
/// into `f(z1, ·) = 0` and a Newton polish in `(t, x)`.
pub fn solve_tangency(eq: &AbelEq) -> Result<TangencyReport, CurveError> {
    solve_tangency_params(&CurveParams::from_eq(eq)?)
}

pub fn solve_tangency_params(p: &CurveParams) -> Result<TangencyReport, CurveError> {
    let mut genericity = Genericity {
        small_a0: p.a0.abs() <= 1e-3,
        small_discriminant: common_zero_discriminant(p.r1, p.r2, p.b0).abs() <= 1e-6,
        clustered_roots: false,
    };
    let mut last_err = None;
    for &prec in &PRECISIONS {
        match eliminate_at(p, prec) {
            Ok(mut rep) => {
                genericity.clustered_roots = rep.genericity.clustered_roots;
                rep.genericity = genericity.clone();
                if !rep.genericity.is_generic() {
                    merge_grid_fallback(p, &mut rep);
                }
                return Ok(rep);
            }
            Err(e) => last_err = Some(e),
        }
    }
    let _ = last_err;
    // Elimination stayed ambiguous: report the grid fallback as partial.
    let mut rep = TangencyReport {
        params: *p,
        points: Vec::new(),
        boundary: Vec::new(),
        resultant_degree: 0,
        resultant_real_roots: 0,
        spurious_multiplicity: 0,
        precision_bits: *PRECISIONS.last().unwrap(),
        method: TangencyMethod::NewtonGrid,
        genericity,
        partial: true,
    };
    merge_grid_fallback(p, &mut rep);
    Ok(rep)
}

fn merge_grid_fallback(p: &CurveParams, rep: &mut TangencyReport) {
    let grid = tangency_newton_grid(p, 96);
    let mut added = false;
    for (t, x) in grid {
        let known = rep.points.iter().chain(&rep.boundary).any(|q| (q.t - t).abs() < 1e-6 && (q.x - x).abs() < 1e-6);
        if known {
            continue;
        }
        match region(p, t, x) {
            Membership::Interior => rep.points.push(curve_point(p, t, x)),
            Membership::Boundary => rep.boundary.push(curve_point(p, t, x)),
            Membership::Outside => continue,
        }
        added = true;
    }
    if added {
        rep.method = TangencyMethod::NewtonGrid;
        rep.points.sort_by(|a, b| a.t.total_cmp(&b.t));
        rep.boundary.sort_by(|a, b| a.t.total_cmp(&b.t));
    }
}

/// Divide out `(z - r)` while `r` stays a root within the coefficient
/// error of `p`. Returns the deflated polynomial and the multiplicity.
fn deflate_root(p: &UniPoly, r: f64) -> (UniPoly, usize) {
    let mut cur = p.clone();
    let mut k = 0;
    let rx = XFloat::from_f64(r, p.prec());
    while cur.degree().unwrap_or(0) > 0 && k < 12 {
        let (q, rem) = cur.deflate(&rx);
        let bound: f64 = cur.errors().iter().enumerate().map(|(i, e)| e * r.abs().powi(i as i32)).sum::<f64>();
        let floor = 1e-24 * cur.magnitude_at(r);
        if rem.abs().to_f64() <= 16.0 * bound + floor {
            cur = q;
            k += 1;
        } else {
            break;
        }
    }
    (cur, k)
}

fn eliminate_at(p: &CurveParams, prec: usize) -> Result<TangencyReport, RootError> {
    let model = rational_model_params(p, prec);
    let res = resultant(&model.f, &model.g, Eliminate::Z2);
    let degree = res.degree().unwrap_or(0);
    if res.is_zero() {
        return Err(RootError::ZeroPolynomial);
    }
    let (res, spurious) = deflate_root(&res, p.b0);
    let roots = if res.degree().unwrap_or(0) == 0 {
        Vec::new()
    } else {
        isolate_at(&res, f64::NEG_INFINITY, f64::INFINITY, 1e-15)?
    };
    let clustered = roots.iter().any(|r| r.multiplicity > 1)
        || roots.windows(2).any(|w| (w[1].value - w[0].value).abs() <= 1e-8 * (1.0 + w[0].value.abs()));

    let mut cands = Vec::new();
    for r in &roots {
        let z1 = r.value;
        for z2 in quadratic_in_z2(p, z1) {
            let (t0, x0) = (angle_of(z1), angle_of(z2));
            // Accept back-substituted candidates whose g residual is small
            // relative to the size of its terms, then polish.
            let gmag = model.g.magnitude_at(z1, z2);
            let gres = model.g.eval_f64(z1, z2).abs();
            if gres > 1e-6 * gmag.max(f64::MIN_POSITIVE) {
                continue;
            }
            if let Some((t, x)) = newton_tangency(p, t0, x0) {
                if (t - t0).abs() < 1e-4 && (x - x0).abs() < 1e-4 {
                    cands.push((t, x));
                    continue;
                }
            }
            // Unpolished: keep only if the trigonometric system itself holds.
            if solves_system(p, t0, x0, 1e-8, 1e-6) {
                cands.push((t0, x0));
            }
        }
    }
    let cands = dedup_points(cands, 1e-9);
    let mut points = Vec::new();
    let mut boundary = Vec::new();
    for (t, x) in cands {
        match region(p, t, x) {
            Membership::Interior => points.push(curve_point(p, t, x)),
            Membership::Boundary => boundary.push(curve_point(p, t, x)),
            Membership::Outside => {}
        }
    }
    points.sort_by(|a, b| a.t.total_cmp(&b.t));
    boundary.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(TangencyReport {
        params: *p,
        points,
        boundary,
        resultant_degree: degree,
        resultant_real_roots: roots.len(),
        spurious_multiplicity: spurious,
        precision_bits: prec,
        method: TangencyMethod::Elimination,
        genericity: Genericity { clustered_roots: clustered, ..Genericity::default() },
        partial: false,
    })
}

/// Real roots in `z2` of `f(z1, z2) = α z2² + β z2 + γ`.
fn quadratic_in_z2(p: &CurveParams, z1: f64) -> Vec<f64> {
    let (r1, r2, b0, c) = (p.r1, p.r2, p.b0, p.c);
    let r1p = r1 + 1.0;
    let alpha = c * r1p * (z1 - b0);
    let beta = -r1p * z1 * z1 - 2.0 * (c - 1.0) * r2 * z1 + 2.0 * b0 * c * r2 + r1 - 1.0;
    let gamma = b0 * r1p * z1 * z1 - (2.0 * b0 * r2 + c * (r1 - 1.0)) * z1 + b0 * (c - 1.0) * (r1 - 1.0);
    let scale = alpha.abs().max(beta.abs()).max(gamma.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if alpha.abs() <= 1e-14 * scale {
        return if beta != 0.0 { vec![-gamma / beta] } else { Vec::new() };
    }
    let disc = beta * beta - 4.0 * alpha * gamma;
    if disc < 0.0 {
        // Keep a numerically double root.
        if disc > -1e-12 * beta * beta {
            return vec![-beta / (2.0 * alpha)];
        }
        return Vec::new();
    }
    let q = -0.5 * (beta + beta.signum() * disc.sqrt());
    let mut out = Vec::with_capacity(2);
    if q != 0.0 {
        out.push(q / alpha);
        out.push(gamma / q);
    } else {
        out.push(0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> CurveParams {
        CurveParams::new(0.3, 0.7, -1.4, 0.45)
    }

    #[test]
    fn h_examples() {
        let eq = AbelEq::from_coeffs([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
        assert!(h_eval(&eq, 0.4, 0.4 + PI).abs() < 1e-14);
        let eq = AbelEq::from_coeffs([0.7, -0.2, 0.9], [0.0, 0.0, 1.0]);
        assert!((h_eval(&eq, 1.3, 1.3) + TAU * 0.7).abs() < 1e-14);
    }

    #[test]
    fn m_on_diagonal() {
        let eq = AbelEq::from_coeffs([0.4, -0.2, 0.9], [0.3, 1.0, 0.5]);
        let t = 2.1;
        let want = eq.a.eval(t) * eq.b.eval(t) * (1.0 - eq.c());
        assert!((m_eval(&eq, t, t) - want).abs() < 1e-13);
    }

    #[test]
    fn harmonic_expansion_matches_definition() {
        let p = params();
        let eq = p.equation();
        for &(t, x) in &[(0.3, 4.0), (1.7, 2.2), (5.1, 0.4)] {
            let direct = 2.0 * m_eval(&eq, t, x) / p.a0;
            assert!((m_harmonic(&p, t, x) - direct).abs() < 1e-12 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn n_examples_and_k_derivative() {
        let p = CurveParams::new(1.0, 0.0, 0.0, 0.0);
        assert!((p.n(0.7) - 0.7f64.cos()).abs() < 1e-15);
        let p = CurveParams::new(1.0, 1.0, 0.0, 1.0);
        assert!((p.n(0.0) - 2.0).abs() < 1e-15);
        let p = params();
        let eq = p.equation();
        let hstep = 1e-5;
        let fd = (k_eval(&eq, 1.0 + hstep).unwrap() - k_eval(&eq, 1.0 - hstep).unwrap()) / (2.0 * hstep);
        let want = -p.n(1.0) / p.b(1.0).powi(2);
        assert!((fd - want).abs() < 1e-6 * (1.0 + want.abs()));
        assert!(matches!(k_eval(&eq, 0.0), Err(CurveError::DivisionNearZero { .. })));
    }

    #[test]
    fn h_branch_examples() {
        let p = CurveParams::new(1.0, 0.0, 0.0, 0.2);
        let z2 = h_zero_branch_params(&p, 2.0).unwrap();
        assert!((z2 - PI).abs() < 1e-12);
        let p = CurveParams::new(1.0, 1.0, 0.0, 0.2);
        let z2 = h_zero_branch_params(&p, 0.0).unwrap();
        assert!(z2 > 1.6 && z2 < 1.7);
        let p = params();
        for z1 in [3.5, 5.0, 7.0] {
            let z2 = h_zero_branch_params(&p, z1).unwrap();
            let (t, x) = (0.5 * (z1 - z2), 0.5 * (z1 + z2));
            assert!(p.hbar(t, x).abs() < 1e-9);
        }
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(common_zero_discriminant(-1.0, 0.3, 2.0), 0.0);
        assert_eq!(common_zero_discriminant(0.0, 0.0, 0.0), 1.0);
        assert_eq!(common_zero_discriminant(0.0, 1.0, 1.0), 0.0);
        let p = CurveParams::new(1.0, 0.0, 1.0, 1.0);
        assert!(common_zero_gap(&p) < 1e-10);
        assert!(common_zero_gap(&params()) > 1e-3);
    }

    #[test]
    fn rational_model_identities() {
        let p = params();
        let model = rational_model_params(&p, 128);
        assert_eq!(model.f.total_degree(), 3);
        assert!(model.g.total_degree() <= 9);
        for &(z1, z2) in &[(0.3, -1.2), (2.5, 0.7), (-4.0, 3.3)] {
            let (t, x) = (angle_of(z1), angle_of(z2));
            let m = p.mbar(t, x);
            assert!((model.mbar_from_f(z1, z2) - m).abs() < 1e-12 * (1.0 + m.abs()));
            let g = p.tangency(t, x);
            assert!((model.tangency_from_g(z1, z2) - g).abs() < 1e-12 * (1.0 + g.abs()));
        }
    }

    #[test]
    fn straight_h_branch_when_a_is_constant() {
        let p = CurveParams::new(0.5, 0.0, 0.0, -0.3);
        for (t, x) in h_branch_samples(&p, 16) {
            assert!((x - t - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn tangency_points_are_solutions() {
        let p = params();
        let rep = solve_tangency_params(&p).unwrap();
        assert!(rep.count() <= 27);
        for q in &rep.points {
            assert!(q.m_residual < 1e-8, "{q:?}");
            assert!(q.minor_residual < 1e-6, "{q:?}");
        }
        let grid = tangency_newton_grid(&p, 64);
        for (t, x) in grid {
            if matches!(region(&p, t, x), Membership::Interior) {
                assert!(rep.points.iter().any(|q| (q.t - t).abs() < 1e-6 && (q.x - x).abs() < 1e-6), "missed ({t}, {x})");
            }
        }
    }

    #[test]
    fn contour_counts_and_polylines() {
        let p = params();
        let c = contour_m(&p, 256, true).unwrap();
        assert!(c.count() >= 1);
        for pl in &c.components {
            for &(t, x) in &pl.points {
                assert!(p.mbar(t, x).abs() < 1e-9);
            }
        }
        let c2 = contour_m(&p, 512, false).unwrap();
        assert_eq!(c.count(), c2.count());
    }
}

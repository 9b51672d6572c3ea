//! Displacement map, Poincaré half-maps and the limit-cycle finder.
//!
//! Sign-changing cycles are found in the normalized frame, where `b > 0` on
//! `(0, t̄)` and `b < 0` on `(t̄, 2π)`. A solution leaving zero at `t1 ∈ (0, t̄)`
//! goes positive and returns to zero at `T⁺(t1)`; the solution reaching zero
//! at `t1 + 2π` was negative since `T⁻(t1)`. Periodic sign-changing
//! solutions correspond to roots of `Δ = T⁺ - T⁻`.
//!
//! Both maps reduce to level sets of two primitives. With `A(t) = ∫_0^t a`,
//!
//! ```text
//! G(t) = ∫_0^t b e^{-A},     H(t) = ∫_0^t b e^{A},
//! T⁺(t1):  G(T) = G(t1),     T⁻(t1):  H(T) = H(2π) + e^{A(2π)} H(t1),
//! ```
//!
//! with `G` decreasing and `H` decreasing on `(t̄, 2π)`. [`HalfMaps`] tabulates
//! `G` and `H` once per equation; [`half_map`] is the slower direct
//! integration kept as a reference.

use crate::centers::{detect_center, verify_center_numeric, CenterClass, CenterKind};
use crate::dopri::{Dense, Stepper};
use crate::flow::{integrate_flow, multiplier, AbelEq, FlowError, Tolerances};
use crate::quad;
use crate::trigpoly::{NormalizedForm, TrigPoly};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CycleError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("sign change of Δ near t = {t} could not be refined")]
    UnresolvedRoot { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

/// `d(x) = (A-1)x + B` for solutions staying positive, and
/// `(Ā-1)x + B̄` for those staying negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearConstants {
    pub a: f64,
    pub b: f64,
    pub a_bar: f64,
    pub b_bar: f64,
}

pub fn linear_constants(eq: &AbelEq) -> LinearConstants {
    let a = eq.a;
    let b = eq.b;
    let weight = |sign: f64| {
        quad::integrate(move |s: f64| b.eval(s) * (sign * a.integrate(s, TAU)).exp(), 0.0, TAU, 1e-14, 0.0)
    };
    let (bp, bm) = if b.is_zero() { (0.0, 0.0) } else { (weight(1.0), weight(-1.0)) };
    LinearConstants { a: (TAU * a.c0).exp(), b: bp, a_bar: (-TAU * a.c0).exp(), b_bar: bm }
}

/// `u(2π, 0, x) - x`.
pub fn displacement(eq: &AbelEq, x: f64, tol: &Tolerances) -> Result<f64, FlowError> {
    Ok(integrate_flow(eq, 0.0, x, TAU, tol)?.final_value - x)
}

/// Half-map by direct integration. `eq` must be normalized and
/// `t1 ∈ (0, t̄)`; returns `None` when the solution does not return to zero
/// inside `(t̄, 2π)`.
pub fn half_map(eq: &AbelEq, t1: f64, side: Side, tol: &Tolerances) -> Result<Option<f64>, FlowError> {
    let tbar = eq.tbar().unwrap_or(std::f64::consts::PI);
    match side {
        Side::Plus => {
            let tr = integrate_flow(eq, t1, 0.0, TAU, tol)?;
            Ok(tr
                .crossings
                .first()
                .map(|c| c.t)
                .filter(|&t| t > tbar && t < TAU))
        }
        Side::Minus => {
            // Backwards from the zero at t1 + 2π, in reversed time.
            let rev = eq.time_reversed();
            let tr = integrate_flow(&rev, -(TAU + t1), 0.0, -tbar, tol)?;
            Ok(tr
                .crossings
                .first()
                .map(|c| -c.t)
                .filter(|&t| t > tbar && t < TAU))
        }
    }
}

/// Residual of the derivative identities of the half-maps, with the
/// derivative taken by central differences:
///
/// * plus: `b(T)·T' - b(t1)·exp(∫_{t1}^{T} a)`
/// * minus: `b(T)·T' - b(t1)·exp(∫_{T}^{t1+2π} a)`
///
/// Returns `None` when the map is undefined at or around `t1`.
pub fn half_map_derivative_residual(
    eq: &AbelEq,
    t1: f64,
    side: Side,
    tol: &Tolerances,
) -> Result<Option<f64>, FlowError> {
    // Five-point stencil: near the edge of its domain T is steep enough
    // (|T'| in the hundreds) that the three-point rule is off by 1e-5
    // relative. The step balances truncation against the noise in T.
    let step = 5e-6;
    let (Some(t), Some(tp), Some(tm), Some(tpp), Some(tmm)) = (
        half_map(eq, t1, side, tol)?,
        half_map(eq, t1 + step, side, tol)?,
        half_map(eq, t1 - step, side, tol)?,
        half_map(eq, t1 + 2.0 * step, side, tol)?,
        half_map(eq, t1 - 2.0 * step, side, tol)?,
    ) else {
        return Ok(None);
    };
    let deriv = (8.0 * (tp - tm) - (tpp - tmm)) / (12.0 * step);
    let growth = match side {
        Side::Plus => eq.a.integrate(t1, t),
        Side::Minus => eq.a.integrate(t, t1 + TAU),
    };
    Ok(Some(eq.b.eval(t) * deriv - eq.b.eval(t1) * growth.exp()))
}

/// Primitive `P(t) = ∫_0^t b e^{σA}` on `[0, 2π]`, stored as the accepted
/// steps of an integration. Values are recomputed by a fresh step from the
/// start of the covering piece, which keeps them at the integrator's local
/// accuracy rather than that of the interpolant.
#[derive(Debug, Clone)]
struct Primitive {
    a: TrigPoly,
    b: TrigPoly,
    sigma: f64,
    ends: Vec<f64>,
    starts: Vec<(f64, f64, f64)>,
    pieces: Vec<Dense>,
    total: f64,
}

impl Primitive {
    fn build(a: TrigPoly, b: TrigPoly, sigma: f64) -> Result<Self, FlowError> {
        let w = move |t: f64| b.eval(t) * (sigma * a.integrate(0.0, t)).exp();
        // Typical size of the primitive, for the absolute tolerance.
        let scale = TAU * (0..64).map(|i| w(TAU * (i as f64 + 0.5) / 64.0).abs()).sum::<f64>() / 64.0;
        let rhs = move |t: f64, _y: f64| w(t);
        let mut st = Stepper::new(rhs, 0.0, 0.0, 0.05, 1e-13, 1e-16 * scale.max(f64::MIN_POSITIVE));
        let mut ends = Vec::with_capacity(256);
        let mut starts = Vec::with_capacity(256);
        let mut pieces = Vec::with_capacity(256);
        while st.t < TAU {
            let acc = st.advance(TAU).map_err(|e| FlowError::StepFailure { t: e.t, h: e.h })?;
            ends.push(acc.t1);
            starts.push((acc.t0, acc.y0, acc.k1));
            pieces.push(acc.dense);
        }
        Ok(Primitive { a, b, sigma, ends, starts, pieces, total: st.y })
    }

    #[inline]
    fn weight(&self, t: f64) -> f64 {
        self.b.eval(t) * (self.sigma * self.a.integrate(0.0, t)).exp()
    }

    fn piece(&self, t: f64) -> usize {
        self.ends.partition_point(|&e| e < t).min(self.pieces.len() - 1)
    }

    /// Interpolated value, used for bracketing.
    #[inline]
    fn approx(&self, t: f64) -> f64 {
        if t >= TAU {
            return self.total;
        }
        self.pieces[self.piece(t)].eval(t)
    }

    fn eval(&self, t: f64) -> f64 {
        if t >= TAU {
            return self.total;
        }
        let (t0, y0, k1) = self.starts[self.piece(t)];
        if t <= t0 {
            return y0;
        }
        let w = |s: f64, _y: f64| self.weight(s);
        crate::dopri::trial(&w, t0, y0, t - t0, k1).y
    }

    /// Root of `P(t) = level` on `[lo, hi]` where `P` is decreasing.
    fn solve_decreasing(&self, level: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if hi - lo < 1e-9 {
                break;
            }
            if self.approx(mid) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Newton on the exact values; P' is the weight itself.
        let mut t = 0.5 * (lo + hi);
        for _ in 0..4 {
            let w = self.weight(t);
            if w == 0.0 {
                break;
            }
            let next = t - (self.eval(t) - level) / w;
            if !(next > lo - 1e-9 && next < hi + 1e-9) {
                break;
            }
            let done = (next - t).abs() < 1e-15;
            t = next;
            if done {
                break;
            }
        }
        t
    }
}

/// Tabulated half-maps of a normalized equation.
#[derive(Debug, Clone)]
pub struct HalfMaps {
    eq: AbelEq,
    tbar: f64,
    growth: f64,
    g: Primitive,
    h: Primitive,
}

impl HalfMaps {
    /// `eq` must be normalized.
    pub fn new(eq: &AbelEq) -> Result<Self, FlowError> {
        let tbar = eq.tbar().expect("HalfMaps requires a normalized equation");
        let g = Primitive::build(eq.a, eq.b, -1.0)?;
        let h = Primitive::build(eq.a, eq.b, 1.0)?;
        Ok(HalfMaps { eq: *eq, tbar, growth: (TAU * eq.a.c0).exp(), g, h })
    }

    pub fn tbar(&self) -> f64 {
        self.tbar
    }

    pub fn plus(&self, t1: f64) -> Option<f64> {
        let level = self.g.eval(t1);
        if !(self.g.total < level) {
            return None;
        }
        Some(self.g.solve_decreasing(level, self.tbar, TAU))
    }

    pub fn minus(&self, t1: f64) -> Option<f64> {
        let level = self.h.total + self.growth * self.h.eval(t1);
        if !(self.h.eval(self.tbar) > level) {
            return None;
        }
        Some(self.h.solve_decreasing(level, self.tbar, TAU))
    }

    pub fn delta(&self, t1: f64) -> Option<f64> {
        Some(self.plus(t1)? - self.minus(t1)?)
    }

    /// Normalized-frame value at time `s ∈ [0, 2π]` of the sign-changing
    /// periodic candidate that leaves zero upward at `t1`.
    pub fn orbit_value(&self, t1: f64, s: f64) -> Option<f64> {
        let t2 = self.plus(t1)?;
        let ea = |t: f64| self.eq.a.integrate(0.0, t).exp();
        let v = if s < t1 {
            (self.h.eval(s) - self.h.eval(t1)) / ea(s)
        } else if s <= t2 {
            ea(s) * (self.g.eval(s) - self.g.eval(t1))
        } else {
            (self.h.eval(s) - self.h.total - self.growth * self.h.eval(t1)) / ea(s)
        };
        Some(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    Positive,
    Negative,
    SignChanging,
    /// The identically zero solution (only when `b ≡ 0`).
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    /// Value at `t = 0` in original coordinates.
    pub x0: f64,
    pub sign_class: SignClass,
    /// Crossing times `(t1, t2)` in the normalized frame.
    pub crossings: Option<(f64, f64)>,
    /// The same crossing times in the original time variable, in `[0, 2π)`.
    pub crossings_original: Option<(f64, f64)>,
    pub multiplier: f64,
    /// For the zero solution, the multiplier seen from `x < 0`.
    pub multiplier_left: Option<f64>,
    pub hyperbolic: bool,
    /// `|d(x0)|` from an independent integration.
    pub residual: f64,
    /// Found as a local minimum of `|Δ|` rather than a sign change.
    pub tangential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Finite,
    Center,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub kind: ReportKind,
    /// Isolated cycles. For linear centers this still lists isolated
    /// sign-changing cycles found alongside the continuum.
    pub cycles: Vec<Cycle>,
    pub center_class: CenterClass,
    /// The probe found `d ≈ 0` everywhere but the algebraic test disagreed,
    /// or vice versa.
    pub suspected_center: bool,
    pub center_probe_max: Option<f64>,
    pub linear: LinearConstants,
    pub normalization: Option<NormalizedForm>,
    /// Roots of Δ whose reconstructed orbit failed validation.
    pub unresolved: Vec<f64>,
}

impl CycleReport {
    pub fn count(&self, class: SignClass) -> usize {
        self.cycles.iter().filter(|c| c.sign_class == class).count()
    }

    pub fn constant_sign_count(&self) -> usize {
        self.cycles.len() - self.count(SignClass::SignChanging)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub tol: Tolerances,
    pub grid: usize,
    pub edge: f64,
    pub root_tol: f64,
    pub tangential_tol: f64,
    /// Relative acceptance threshold on `|d(x0)|`.
    pub validate_tol: f64,
    pub mult_tol: f64,
    pub center_probe: usize,
    pub center_tol: f64,
    pub sep_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            tol: Tolerances::default(),
            grid: 512,
            edge: 1e-4,
            root_tol: 1e-10,
            tangential_tol: 1e-7,
            validate_tol: 1e-8,
            mult_tol: 1e-6,
            center_probe: 32,
            center_tol: 1e-9,
            sep_tol: 1e-7,
        }
    }
}

impl SearchConfig {
    pub fn with_tol(tol: Tolerances) -> Self {
        SearchConfig { tol, ..Default::default() }
    }
}

/// Fill in multiplier and hyperbolicity from a fresh integration.
pub fn classify_cycle(eq: &AbelEq, cyc: &Cycle, cfg: &SearchConfig) -> Result<Cycle, FlowError> {
    let tr = integrate_flow(eq, 0.0, cyc.x0, TAU, &cfg.tol)?;
    let mut out = cyc.clone();
    out.residual = (tr.final_value - cyc.x0).abs();
    out.multiplier = multiplier(eq, &tr);
    out.hyperbolic = (out.multiplier - 1.0).abs() >= cfg.mult_tol;
    if cyc.sign_class == SignClass::Zero {
        let left = (-eq.a.integrate(0.0, TAU)).exp();
        out.multiplier_left = Some(left);
        out.hyperbolic = out.hyperbolic && (left - 1.0).abs() >= cfg.mult_tol;
    }
    Ok(out)
}

fn blank_cycle(x0: f64, sign_class: SignClass) -> Cycle {
    Cycle {
        x0,
        sign_class,
        crossings: None,
        crossings_original: None,
        multiplier: f64::NAN,
        multiplier_left: None,
        hyperbolic: false,
        residual: f64::NAN,
        tangential: false,
    }
}

/// All limit cycles, or the center classification.
pub fn find_cycles(eq: &AbelEq, cfg: &SearchConfig) -> Result<CycleReport, CycleError> {
    let center_class = detect_center(eq);
    let linear = linear_constants(eq);
    let normalization = eq.normalize().ok();
    let mut report = CycleReport {
        kind: ReportKind::Finite,
        cycles: Vec::new(),
        center_class,
        suspected_center: false,
        center_probe_max: None,
        linear,
        normalization,
        unresolved: Vec::new(),
    };

    // A continuum needs A = 1 or Ā = 1, i.e. a0 = 0; only then is the probe worth running.
    if center_class.witness.a0_zero {
        let probe = verify_center_numeric(eq, cfg.center_probe)?;
        report.center_probe_max = Some(probe);
        let numeric = probe < cfg.center_tol;
        let algebraic = center_class.kind == CenterKind::Global;
        report.suspected_center = numeric != algebraic;
        if algebraic || numeric {
            report.kind = ReportKind::Center;
            return Ok(report);
        }
    }
    if center_class.is_center() {
        report.kind = ReportKind::Center;
    }


    // Constant-sign cycles: fixed points of the affine pieces.
    if eq.b.is_zero() {
        let cyc = classify_cycle(eq, &blank_cycle(0.0, SignClass::Zero), cfg)?;
        report.cycles.push(cyc);
    } else {
        let pieces = [
            (linear.a, linear.b, SignClass::Positive, center_class.kind == CenterKind::LinearPositive),
            (linear.a_bar, linear.b_bar, SignClass::Negative, center_class.kind == CenterKind::LinearNegative),
        ];
        for (slope, offset, class, is_continuum) in pieces {
            if is_continuum || (slope - 1.0).abs() < 1e-14 {
                continue;
            }
            let x = offset / (1.0 - slope);
            let right_side = match class {
                SignClass::Positive => x > 0.0,
                _ => x < 0.0,
            };
            if !right_side {
                continue;
            }
            let (x, tr) = polish(eq, x, cfg)?;
            if tr.changes_sign() || !validated(eq, x, &tr, cfg) {
                continue;
            }
            report.cycles.push(classify_cycle(eq, &blank_cycle(x, class), cfg)?);
        }
    }

    if let Some(nf) = normalization {
        sign_changing_cycles(eq, &nf, cfg, &mut report)?;
    }

    report.cycles.sort_by(|p, q| p.x0.total_cmp(&q.x0));
    report
        .cycles
        .dedup_by(|p, q| (p.x0 - q.x0).abs() <= cfg.sep_tol * (1.0 + q.x0.abs()));
    Ok(report)
}

fn sign_changing_cycles(
    eq: &AbelEq,
    nf: &NormalizedForm,
    cfg: &SearchConfig,
    report: &mut CycleReport,
) -> Result<(), CycleError> {
    let neq = AbelEq::from_form(nf);
    let maps = HalfMaps::new(&neq)?;
    let tbar = nf.tbar;
    let n = cfg.grid.max(8);
    let (lo, hi) = (cfg.edge, tbar - cfg.edge);
    let ts: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let ds: Vec<Option<f64>> = ts.iter().map(|&t| maps.delta(t)).collect();
    let (ts, ds) = with_domain_edges(&maps, ts, ds);
    let n = ts.len();

    // Δ vanishing on a whole run of the grid is a continuum, not isolated cycles.
    let flat = ds
        .iter()
        .map(|d| d.map_or(false, |v| v.abs() < 1e-9))
        .fold((0usize, 0usize), |(run, best), z| {
            let run = if z { run + 1 } else { 0 };
            (run, best.max(run))
        })
        .1;
    if flat >= 8 {
        report.suspected_center = true;
        report.kind = ReportKind::Center;
        return Ok(());
    }

    let mut roots: Vec<(f64, bool)> = Vec::new();
    for i in 0..n - 1 {
        let (Some(d0), Some(d1)) = (ds[i], ds[i + 1]) else { continue };
        if d0 == 0.0 {
            roots.push((ts[i], false));
        } else if d0.signum() != d1.signum() && d1 != 0.0 {
            roots.push((bisect_delta(&maps, ts[i], ts[i + 1], d0, cfg.root_tol)?, false));
        }
    }
    if let Some(&Some(dl)) = ds.last() {
        if dl == 0.0 {
            roots.push((ts[n - 1], false));
        }
    }
    // Even-multiplicity roots show up only as small local minima of |Δ|.
    for i in 1..n - 1 {
        let (Some(dm), Some(d0), Some(dp)) = (ds[i - 1], ds[i], ds[i + 1]) else { continue };
        let same = dm.signum() == d0.signum() && d0.signum() == dp.signum();
        if same && d0.abs() < dm.abs() && d0.abs() <= dp.abs() && d0.abs() < cfg.tangential_tol {
            let (t, v) = golden_min(|t| maps.delta(t).map_or(f64::INFINITY, f64::abs), ts[i - 1], ts[i + 1]);
            if v < 1e-3 * cfg.tangential_tol {
                roots.push((t, true));
            }
        }
    }

    for (t1, tangential) in roots {
        let Some(t2) = maps.plus(t1) else {
            report.unresolved.push(t1);
            continue;
        };
        // Original t = 0 is normalized time 2π - τ0.
        let s0 = (TAU - nf.time_shift).rem_euclid(TAU);
        let Some(xn) = maps.orbit_value(t1, s0) else {
            report.unresolved.push(t1);
            continue;
        };
        let (x0, tr) = polish(eq, nf.to_original_x(xn), cfg)?;
        if !validated(eq, x0, &tr, cfg) || !tr.changes_sign() {
            report.unresolved.push(t1);
            continue;
        }
        let mut cyc = blank_cycle(x0, SignClass::SignChanging);
        cyc.crossings = Some((t1, t2));
        cyc.crossings_original = Some((
            (t1 + nf.time_shift).rem_euclid(TAU),
            (t2 + nf.time_shift).rem_euclid(TAU),
        ));
        cyc.tangential = tangential;
        report.cycles.push(classify_cycle(eq, &cyc, cfg)?);
    }
    Ok(())
}

/// `|d(x0)|` small relative to `x0` and to the conditioning `|u_x - 1|`:
/// near a strongly repelling cycle one ulp of `x0` already moves `d` by
/// the multiplier.
fn validated(eq: &AbelEq, x0: f64, tr: &crate::flow::Trajectory, cfg: &SearchConfig) -> bool {
    let cond = (multiplier(eq, tr) - 1.0).abs();
    let cond = if cond.is_finite() { cond.max(1.0) } else { 1.0 };
    (tr.final_value - x0).abs() < cfg.validate_tol * (1.0 + x0.abs()) * cond
}

/// A few Newton steps on `d(x) = 0` using the flow's multiplier. Strongly
/// repelling cycles amplify a tiny error in `x0` into a residual that would
/// fail validation. Steps longer than `1e-3 (1 + |x|)` are refused, so the
/// polish never jumps to a different cycle.
fn polish(eq: &AbelEq, mut x: f64, cfg: &SearchConfig) -> Result<(f64, crate::flow::Trajectory), FlowError> {
    let mut tr = integrate_flow(eq, 0.0, x, TAU, &cfg.tol)?;
    for _ in 0..4 {
        let d = tr.final_value - x;
        if d.abs() < 0.1 * cfg.validate_tol * (1.0 + x.abs()) {
            break;
        }
        let slope = multiplier(eq, &tr) - 1.0;
        if !slope.is_finite() || slope.abs() < 1e-6 {
            break;
        }
        let step = d / slope;
        if step.abs() > 1e-3 * (1.0 + x.abs()) {
            break;
        }
        let candidate = integrate_flow(eq, 0.0, x - step, TAU, &cfg.tol)?;
        if (candidate.final_value - (x - step)).abs() >= d.abs() {
            break;
        }
        x -= step;
        tr = candidate;
    }
    Ok((x, tr))
}

/// Add a sample just inside each end of the domain of `Δ`. Near a strongly
/// repelling cycle `T⁺` can sweep its whole range between two grid points,
/// hiding a sign change next to the place where it stops being defined.
fn with_domain_edges(maps: &HalfMaps, ts: Vec<f64>, ds: Vec<Option<f64>>) -> (Vec<f64>, Vec<Option<f64>>) {
    let mut out_t = Vec::with_capacity(ts.len() + 4);
    let mut out_d = Vec::with_capacity(ts.len() + 4);
    for i in 0..ts.len() {
        out_t.push(ts[i]);
        out_d.push(ds[i]);
        if i + 1 == ts.len() || ds[i].is_some() == ds[i + 1].is_some() {
            continue;
        }
        let (mut def, mut undef) = if ds[i].is_some() { (ts[i], ts[i + 1]) } else { (ts[i + 1], ts[i]) };
        let mut best = None;
        for _ in 0..60 {
            let mid = 0.5 * (def + undef);
            if mid == def || mid == undef {
                break;
            }
            match maps.delta(mid) {
                Some(v) => {
                    def = mid;
                    best = Some(v);
                }
                None => undef = mid,
            }
        }
        if let Some(v) = best {
            out_t.push(def);
            out_d.push(Some(v));
        }
    }
    (out_t, out_d)
}

fn bisect_delta(maps: &HalfMaps, mut lo: f64, mut hi: f64, dlo: f64, tol: f64) -> Result<f64, CycleError> {
    let s_lo = dlo.signum();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let Some(dm) = maps.delta(mid) else {
            return Err(CycleError::UnresolvedRoot { t: mid });
        };
        if dm == 0.0 {
            return Ok(mid);
        }
        if dm.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// A priori bound on `|x0|` of sign-changing cycles:
/// `2π·max|b|·e^{2π·max|a|}`. Constant-sign cycles can lie outside it.
pub fn gronwall_window(eq: &AbelEq) -> f64 {
    TAU * eq.b.max_abs() * (TAU * eq.a.max_abs()).exp()
}

/// `exp(∫_{t1}^{t2} a - ∫_{t2}^{t1+2π} a)`.
pub fn sign_changing_multiplier(a: &TrigPoly, t1: f64, t2: f64) -> f64 {
    (a.integrate(t1, t2) - a.integrate(t2, t1 + TAU)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn eq(a: [f64; 3], b: [f64; 3]) -> AbelEq {
        AbelEq::from_coeffs(a, b)
    }

    #[test]
    fn linear_constants_closed_form() {
        let lc = linear_constants(&eq([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]));
        let big = TAU.exp();
        assert!((lc.a - big).abs() < 1e-12 * big);
        assert!((lc.b - (big - 1.0) / 2.0).abs() < 1e-10 * big);
        assert!((lc.a * lc.a_bar - 1.0).abs() < 1e-12);
        let z = linear_constants(&eq([0.0, 1.0, 2.0], [0.0; 3]));
        assert_eq!((z.a, z.b, z.b_bar), (1.0, 0.0, 0.0));
    }

    #[test]
    fn displacement_examples() {
        let tol = Tolerances::default();
        let c = eq([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]);
        assert!(displacement(&c, -0.5, &tol).unwrap().abs() < 1e-9);
        let f = eq([0.0; 3], [0.0, 0.0, 1.0]);
        for x in [-3.0, -0.2, 0.0, 1.5] {
            assert!(displacement(&f, x, &tol).unwrap().abs() < 1e-9);
        }
        let g = eq([0.4, 0.1, -0.3], [0.5, 0.2, 0.1]);
        let lc = linear_constants(&g);
        // b > 0 here, so every solution from x ≥ 0 stays positive.
        let x = 2.0;
        let d = displacement(&g, x, &tol).unwrap();
        assert!((d - ((lc.a - 1.0) * x + lc.b)).abs() < 1e-8 * (1.0 + d.abs()));
    }

    #[test]
    fn half_maps_center_and_free_cases() {
        let tol = Tolerances::default();
        let c = AbelEq::normalized(TrigPoly::new(0.0, 0.0, 1.0), 0.0);
        let t = half_map(&c, PI / 2.0, Side::Plus, &tol).unwrap().unwrap();
        assert!((t - 1.5 * PI).abs() < 1e-9);
        let f = AbelEq::normalized(TrigPoly::ZERO, 0.0);
        let t = half_map(&f, PI / 4.0, Side::Plus, &tol).unwrap().unwrap();
        assert!((t - (TAU - PI / 4.0)).abs() < 1e-9);
        let t = half_map(&f, PI / 4.0, Side::Minus, &tol).unwrap().unwrap();
        assert!((t - (TAU - PI / 4.0)).abs() < 1e-9);
    }

    #[test]
    fn tables_match_direct_half_maps() {
        let tol = Tolerances::tight();
        let e = AbelEq::normalized(TrigPoly::new(0.35, -0.8, 0.5), 0.4);
        let maps = HalfMaps::new(&e).unwrap();
        for k in 1..10 {
            let t1 = maps.tbar() * k as f64 / 10.0;
            for side in [Side::Plus, Side::Minus] {
                let direct = half_map(&e, t1, side, &tol).unwrap();
                let table = match side {
                    Side::Plus => maps.plus(t1),
                    Side::Minus => maps.minus(t1),
                };
                match (direct, table) {
                    (Some(p), Some(q)) => assert!((p - q).abs() < 1e-9, "{side:?} {t1}: {p} vs {q}"),
                    (None, None) => {}
                    other => panic!("{side:?} {t1}: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn two_constant_sign_cycles() {
        let e = eq([-1.0, 0.0, 0.0], [2.0, 1.0, 0.0]);
        let rep = find_cycles(&e, &SearchConfig::default()).unwrap();
        assert_eq!(rep.kind, ReportKind::Finite);
        assert_eq!(rep.cycles.len(), 2, "{:?}", rep.cycles);
        assert!((rep.cycles[0].x0 + 2.5).abs() < 1e-9);
        assert!((rep.cycles[1].x0 - 2.5).abs() < 1e-9);
        assert_eq!(rep.cycles[0].sign_class, SignClass::Negative);
        assert!((rep.cycles[1].multiplier - (-TAU).exp()).abs() < 1e-9);
    }

    #[test]
    fn center_is_reported() {
        let rep = find_cycles(&eq([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]), &SearchConfig::default()).unwrap();
        assert_eq!(rep.kind, ReportKind::Center);
        assert_eq!(rep.center_class.kind, CenterKind::Global);
        assert!(!rep.suspected_center);
    }

    #[test]
    fn zero_solution_when_b_vanishes() {
        let rep = find_cycles(&eq([1.0, 0.0, 0.0], [0.0; 3]), &SearchConfig::default()).unwrap();
        assert_eq!(rep.kind, ReportKind::Finite);
        assert_eq!(rep.cycles.len(), 1);
        assert_eq!(rep.cycles[0].sign_class, SignClass::Zero);
        assert!(rep.cycles[0].hyperbolic);
    }

    #[test]
    fn sign_changing_cycle_is_validated() {
        let e = eq([0.5, 1.0, 0.0], [0.1, 0.0, 1.0]);
        let rep = find_cycles(&e, &SearchConfig::default()).unwrap();
        let sc: Vec<_> = rep.cycles.iter().filter(|c| c.sign_class == SignClass::SignChanging).collect();
        for c in &sc {
            assert!(c.residual < 1e-8 * (1.0 + c.x0.abs()));
            let (t1, t2) = c.crossings.unwrap();
            let nf = rep.normalization.unwrap();
            assert!(0.0 < t1 && t1 < nf.tbar && nf.tbar < t2 && t2 < TAU);
            let closed = sign_changing_multiplier(&nf.a, t1, t2);
            assert!(((closed - c.multiplier) / closed).abs() < 1e-7);
        }
        assert!(rep.unresolved.is_empty());
    }
}

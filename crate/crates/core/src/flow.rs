//! Integration of `x' = a(t)|x| + b(t)` with located sign crossings.
//!
//! Within a stretch of constant sign σ the equation is the linear ODE
//! `x' = σ a(t) x + b(t)`, which is what the stepper integrates. Sign changes
//! are bracketed on the dense output, refined by re-stepping from the start of
//! the step, and integration restarts at the crossing with `u = 0` exactly.

use crate::dopri::{Accepted, Dense, Stepper};
use crate::trigpoly::{normalize, tbar_of, NormalizedForm, TrigError, TrigPoly};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("step size control failed at t = {t} (h = {h})")]
    StepFailure { t: f64, h: f64 },
    #[error("t_end ({t_end}) must exceed the initial time ({tau})")]
    EmptySpan { tau: f64, t_end: f64 },
    #[error("non-finite initial data")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    /// Absolute accuracy of located crossing times.
    pub event: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rel: 1e-10, abs: 1e-12, event: 1e-12 }
    }
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tolerances { rel, abs, ..Default::default() }
    }

    pub fn tight() -> Self {
        Tolerances { rel: 1e-13, abs: 1e-15, event: 1e-13 }
    }

    pub fn halved(&self) -> Self {
        Tolerances { rel: self.rel * 0.5, abs: self.abs * 0.5, event: self.event * 0.5 }
    }
}

/// The equation `x' = a(t)|x| + b(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbelEq {
    pub a: TrigPoly,
    pub b: TrigPoly,
}

impl AbelEq {
    pub const fn new(a: TrigPoly, b: TrigPoly) -> Self {
        AbelEq { a, b }
    }

    /// Equation with normalized right-hand side `sin t + b0 (1 - cos t)`.
    pub const fn normalized(a: TrigPoly, b0: f64) -> Self {
        AbelEq { a, b: TrigPoly::normalized_b(b0) }
    }

    pub fn from_form(nf: &NormalizedForm) -> Self {
        AbelEq::normalized(nf.a, nf.b0)
    }

    pub fn from_coeffs(a: [f64; 3], b: [f64; 3]) -> Self {
        AbelEq::new(TrigPoly::new(a[0], a[1], a[2]), TrigPoly::new(b[0], b[1], b[2]))
    }

    pub fn a0(&self) -> f64 {
        self.a.c0
    }

    /// `(r1, r2) = (a1/a0, a2/a0)`, absent when `a0 = 0`.
    pub fn ratios(&self) -> Option<(f64, f64)> {
        (self.a.c0 != 0.0).then(|| (self.a.c1 / self.a.c0, self.a.c2 / self.a.c0))
    }

    /// `c = e^{π a0}`.
    pub fn c(&self) -> f64 {
        (PI * self.a.c0).exp()
    }

    /// Whether `b` already has the canonical form `sin t + b0(1 - cos t)`.
    pub fn is_normalized(&self) -> bool {
        let b = &self.b;
        b.c2 == 1.0 && (b.c0 + b.c1).abs() <= 1e-14 * (1.0 + b.c0.abs())
    }

    /// Second zero of `b` for a normalized equation.
    pub fn tbar(&self) -> Option<f64> {
        self.is_normalized().then(|| tbar_of(self.b.c0))
    }

    pub fn normalize(&self) -> Result<NormalizedForm, TrigError> {
        normalize(&self.a, &self.b)
    }

    #[inline]
    pub fn field(&self, t: f64, x: f64) -> f64 {
        let (s, c) = t.sin_cos();
        self.a.eval_sc(s, c) * x.abs() + self.b.eval_sc(s, c)
    }

    /// The equation in reversed time `s = -t`: `v(s) = u(-s)` solves
    /// `v' = -a(-s)|v| - b(-s)`.
    pub fn time_reversed(&self) -> AbelEq {
        AbelEq::new(self.a.reflected().scaled(-1.0), self.b.reflected().scaled(-1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// From positive to negative.
    Down,
    /// From negative to positive.
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub t: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    t1: f64,
    dense: Dense,
}

/// A solution `u(t, τ, x0)` on `[τ, t_end]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub tau: f64,
    pub x0: f64,
    pub t_end: f64,
    /// Sign on the first stretch: +1, -1, or 0 for the identically zero solution.
    pub initial_sign: i8,
    pub crossings: Vec<Crossing>,
    /// Times where `u` reached zero without changing branch.
    pub touches: Vec<f64>,
    pub final_value: f64,
    pub steps: usize,
    segments: Vec<Segment>,
}

impl Trajectory {
    /// Dense-output value at `t ∈ [τ, t_end]`.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        if !(t >= self.tau && t <= self.t_end) {
            return None;
        }
        if self.segments.is_empty() {
            return Some(0.0);
        }
        let i = self.segments.partition_point(|s| s.t1 < t);
        let seg = self.segments.get(i).or(self.segments.last())?;
        Some(seg.dense.eval(t))
    }

    /// Maximal stretches `(start, end, sign)` of constant sign.
    pub fn sign_stretches(&self) -> Vec<(f64, f64, i8)> {
        let mut out = Vec::with_capacity(self.crossings.len() + 1);
        let mut start = self.tau;
        let mut sign = self.initial_sign;
        for c in &self.crossings {
            out.push((start, c.t, sign));
            start = c.t;
            sign = match c.direction {
                Direction::Down => -1,
                Direction::Up => 1,
            };
        }
        out.push((start, self.t_end, sign));
        out
    }

    pub fn changes_sign(&self) -> bool {
        !self.crossings.is_empty()
    }
}

fn sign_from_b(b: &TrigPoly, t: f64) -> i8 {
    // b, b' and b'' cannot vanish together unless b ≡ 0.
    let d1 = b.derivative();
    let d2 = d1.derivative();
    let scale = 1e-13 * (1.0 + b.max_abs());
    for v in [b.eval(t), d1.eval(t), d2.eval(t)] {
        if v.abs() > scale {
            return if v > 0.0 { 1 } else { -1 };
        }
    }
    0
}

/// Integrate from `(τ, x0)` to `t_end`, locating every sign crossing.
pub fn integrate_flow(
    eq: &AbelEq,
    tau: f64,
    x0: f64,
    t_end: f64,
    tol: &Tolerances,
) -> Result<Trajectory, FlowError> {
    if !(tau.is_finite() && x0.is_finite() && t_end.is_finite()) {
        return Err(FlowError::NonFinite);
    }
    if !(t_end > tau) {
        return Err(FlowError::EmptySpan { tau, t_end });
    }
    let mut traj = Trajectory {
        tau,
        x0,
        t_end,
        initial_sign: 0,
        crossings: Vec::new(),
        touches: Vec::new(),
        final_value: 0.0,
        steps: 0,
        segments: Vec::new(),
    };
    let mut sigma: i8 = if x0 > 0.0 {
        1
    } else if x0 < 0.0 {
        -1
    } else {
        sign_from_b(&eq.b, tau)
    };
    if sigma == 0 {
        // x0 = 0 and b ≡ 0: the zero solution.
        return Ok(traj);
    }
    traj.initial_sign = sigma;

    let a = eq.a;
    let b = eq.b;
    let make_field = move |s: i8| {
        let sf = s as f64;
        move |t: f64, y: f64| {
            let (sn, cs) = t.sin_cos();
            sf * a.eval_sc(sn, cs) * y + b.eval_sc(sn, cs)
        }
    };
    let h0 = (0.05f64).min(t_end - tau);
    let mut st = Stepper::new(make_field(sigma), tau, x0, h0, tol.rel, tol.abs);
    let b_scale = 1e-9 * (1.0 + b.max_abs());
    let db = b.derivative();

    while st.t < t_end {
        let acc = st.advance(t_end).map_err(|e| FlowError::StepFailure { t: e.t, h: e.h })?;
        traj.steps += 1;
        let sf = sigma as f64;
        let Some((ta, tb)) = first_sign_change(&acc, sf) else {
            traj.segments.push(Segment { t1: acc.t1, dense: acc.dense });
            continue;
        };
        let tc = refine_crossing(&st.f, &acc, ta, tb, sf, tol.event);
        traj.segments.push(Segment { t1: tc, dense: acc.dense });

        let bt = b.eval(tc);
        let new_sigma: i8 = if bt.abs() > b_scale {
            if bt > 0.0 { 1 } else { -1 }
        } else {
            // Tangential contact: u'' ≈ b'(tc) decides the side u leaves to.
            if db.eval(tc) >= 0.0 { 1 } else { -1 }
        };
        if new_sigma == sigma {
            traj.touches.push(tc);
        } else {
            traj.crossings.push(Crossing {
                t: tc,
                direction: if new_sigma < 0 { Direction::Down } else { Direction::Up },
            });
            sigma = new_sigma;
        }
        let h = st.step_size();
        st = Stepper::new(make_field(sigma), tc, 0.0, h, tol.rel, tol.abs);
        if tc >= t_end {
            break;
        }
    }
    traj.final_value = st.y;
    Ok(traj)
}

/// First sub-interval of the step on which `σ·u` turns negative.
fn first_sign_change(acc: &Accepted, sigma: f64) -> Option<(f64, f64)> {
    const PROBES: usize = 8;
    let h = acc.t1 - acc.t0;
    let mut prev = acc.t0;
    for j in 1..=PROBES {
        let t = if j == PROBES { acc.t1 } else { acc.t0 + h * j as f64 / PROBES as f64 };
        let v = if j == PROBES { acc.y1 } else { acc.dense.eval(t) };
        if sigma * v < 0.0 {
            return Some((prev, t));
        }
        prev = t;
    }
    None
}

/// Illinois iteration on `s ↦ u(s)` where each value is a fresh single step
/// from the start of the accepted step.
fn refine_crossing<F: Fn(f64, f64) -> f64>(
    f: &F,
    acc: &Accepted,
    mut lo: f64,
    mut hi: f64,
    sigma: f64,
    event_tol: f64,
) -> f64 {
    let value = |s: f64| -> f64 {
        if s <= acc.t0 {
            acc.y0
        } else {
            crate::dopri::trial(f, acc.t0, acc.y0, s - acc.t0, acc.k1).y
        }
    };
    let mut flo = sigma * value(lo);
    let mut fhi = sigma * value(hi);
    if flo <= 0.0 {
        return lo;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo <= event_tol {
            break;
        }
        let mut s = (lo * fhi - hi * flo) / (fhi - flo);
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let fs = sigma * value(s);
        if fs == 0.0 {
            return s;
        }
        if fs > 0.0 {
            lo = s;
            flo = fs;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            hi = s;
            fhi = fs;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        }
    }
    // The crossing is reported at the first point where σ·u ≤ 0 is certain.
    hi
}

/// `u_x` over the trajectory: `exp(∫ sign(u)·a)` in closed form.
///
/// For the identically zero solution the right derivative (`sign = +1`)
/// is returned.
pub fn multiplier(eq: &AbelEq, traj: &Trajectory) -> f64 {
    if traj.initial_sign == 0 {
        return eq.a.integrate(traj.tau, traj.t_end).exp();
    }
    let log: f64 = traj
        .sign_stretches()
        .iter()
        .map(|&(s0, s1, sg)| sg as f64 * eq.a.integrate(s0, s1))
        .sum();
    log.exp()
}

/// `u(τ + 2π, τ, x0)`; convenience over [`integrate_flow`].
pub fn period_map(eq: &AbelEq, x0: f64, tol: &Tolerances) -> Result<f64, FlowError> {
    Ok(integrate_flow(eq, 0.0, x0, TAU, tol)?.final_value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq(a: [f64; 3], b: [f64; 3]) -> AbelEq {
        AbelEq::from_coeffs(a, b)
    }

    #[test]
    fn pure_forcing_returns_to_zero() {
        let e = eq([0.0; 3], [0.0, 0.0, 1.0]);
        let tr = integrate_flow(&e, 0.0, 0.0, TAU, &Tolerances::default()).unwrap();
        assert!(tr.final_value.abs() < 1e-9);
        assert!(tr.crossings.is_empty());
        let mid = tr.value_at(PI).unwrap();
        assert!((mid - 2.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_center_orbit() {
        let e = eq([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]);
        let tr = integrate_flow(&e, 0.0, -0.5, TAU, &Tolerances::default()).unwrap();
        assert!((tr.final_value + 0.5).abs() < 1e-10);
        assert_eq!(tr.crossings.len(), 2);
        assert!((multiplier(&e, &tr) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn linear_growth_closed_form() {
        let e = eq([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
        let tr = integrate_flow(&e, 0.0, 10.0, TAU, &Tolerances::default()).unwrap();
        let big = TAU.exp();
        let expect = 10.0 * big + (big - 1.0) / 2.0;
        assert!(((tr.final_value - expect) / expect).abs() < 1e-9);
        assert!((multiplier(&e, &tr) - big).abs() < 1e-9 * big);
    }

    #[test]
    fn crossings_satisfy_the_zero_condition() {
        let e = eq([0.3, -0.4, 0.8], [0.2, 1.0, -0.5]);
        let tr = integrate_flow(&e, 0.0, -1.0, TAU, &Tolerances::default()).unwrap();
        assert_eq!(tr.crossings.len(), 1);
        for c in &tr.crossings {
            let u = tr.value_at(c.t).unwrap();
            assert!(u.abs() < 1e-9, "u({}) = {u}", c.t);
        }
    }

    #[test]
    fn multiplier_matches_finite_difference() {
        let e = eq([0.3, -0.4, 0.8], [0.2, 1.0, -0.5]);
        let tol = Tolerances::tight();
        let x = -1.0;
        let d = 1e-6;
        let tr = integrate_flow(&e, 0.0, x, TAU, &tol).unwrap();
        let p = period_map(&e, x + d, &tol).unwrap();
        let m = period_map(&e, x - d, &tol).unwrap();
        let fd = (p - m) / (2.0 * d);
        let mu = multiplier(&e, &tr);
        assert!(((fd - mu) / mu).abs() < 1e-5, "fd {fd} vs {mu}");
    }

    #[test]
    fn zero_solution_stays_zero() {
        let e = eq([1.0, 0.0, 0.0], [0.0; 3]);
        let tr = integrate_flow(&e, 0.0, 0.0, TAU, &Tolerances::default()).unwrap();
        assert_eq!(tr.initial_sign, 0);
        assert_eq!(tr.final_value, 0.0);
    }

    #[test]
    fn tangential_contact_is_a_touch() {
        // u = 1 - cos t touches zero at t = 2π... and at t = 0 it starts there.
        // Start at t = -π with u = 2 so the contact at 0 is interior.
        let e = eq([0.0; 3], [0.0, 0.0, 1.0]);
        let tr = integrate_flow(&e, -PI, 2.0, PI, &Tolerances::default()).unwrap();
        assert!(tr.crossings.is_empty(), "{:?}", tr.crossings);
        assert!((tr.final_value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_span() {
        let e = eq([0.0; 3], [0.0, 0.0, 1.0]);
        assert!(matches!(
            integrate_flow(&e, 1.0, 0.0, 1.0, &Tolerances::default()),
            Err(FlowError::EmptySpan { .. })
        ));
    }
}

//! Linear trigonometric polynomials `c0 + c1 cos t + c2 sin t` and the
//! canonical normalization of the coefficient pair `(a, b)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrigError {
    #[error("trigonometric polynomial is identically zero")]
    IdenticallyZero,
    #[error("b has no simple zero with positive slope; use the linear-only path")]
    NoSignChange,
}

/// `c0 + c1·cos t + c2·sin t`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigPoly {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    Simple,
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub t: f64,
    pub multiplicity: Multiplicity,
}

impl TrigPoly {
    pub const ZERO: TrigPoly = TrigPoly { c0: 0.0, c1: 0.0, c2: 0.0 };

    pub const fn new(c0: f64, c1: f64, c2: f64) -> Self {
        TrigPoly { c0, c1, c2 }
    }

    /// The normalized right-hand side `sin t + b0 (1 - cos t)`.
    pub const fn normalized_b(b0: f64) -> Self {
        TrigPoly { c0: b0, c1: -b0, c2: 1.0 }
    }

    pub fn from_slice(c: &[f64]) -> Option<Self> {
        match c {
            [c0, c1, c2] => Some(TrigPoly::new(*c0, *c1, *c2)),
            _ => None,
        }
    }

    pub fn coeffs(&self) -> [f64; 3] {
        [self.c0, self.c1, self.c2]
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        self.c0 + self.c1 * c + self.c2 * s
    }

    /// Evaluate from precomputed `sin t`, `cos t`.
    #[inline]
    pub fn eval_sc(&self, s: f64, c: f64) -> f64 {
        self.c0 + self.c1 * c + self.c2 * s
    }

    pub fn derivative(&self) -> TrigPoly {
        TrigPoly::new(0.0, self.c2, -self.c1)
    }

    /// `sqrt(c1² + c2²)`, the size of the oscillating part.
    pub fn amplitude(&self) -> f64 {
        self.c1.hypot(self.c2)
    }

    /// Sharp bound on `|p(t)|`.
    pub fn max_abs(&self) -> f64 {
        self.c0.abs() + self.amplitude()
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0.0 && self.c1 == 0.0 && self.c2 == 0.0
    }

    /// Exact `∫_{t0}^{t1} p`.
    pub fn integrate(&self, t0: f64, t1: f64) -> f64 {
        let (s0, k0) = t0.sin_cos();
        let (s1, k1) = t1.sin_cos();
        self.c0 * (t1 - t0) + self.c1 * (s1 - s0) - self.c2 * (k1 - k0)
    }

    /// `q(t) = p(t + shift)`.
    pub fn shifted(&self, shift: f64) -> TrigPoly {
        let (s, c) = shift.sin_cos();
        TrigPoly::new(
            self.c0,
            self.c1 * c + self.c2 * s,
            self.c2 * c - self.c1 * s,
        )
    }

    /// `q(t) = p(-t)`.
    pub fn reflected(&self) -> TrigPoly {
        TrigPoly::new(self.c0, self.c1, -self.c2)
    }

    pub fn scaled(&self, k: f64) -> TrigPoly {
        TrigPoly::new(self.c0 * k, self.c1 * k, self.c2 * k)
    }

    /// Zeros in `[0, 2π)`, sorted, with multiplicity flags.
    ///
    /// Uses the half-angle substitution `τ = tan(t/2)`, under which `p`
    /// becomes `((c0-c1)τ² + 2c2τ + (c0+c1)) / (1+τ²)`. The root `t = π`
    /// corresponds to `τ = ∞` and is handled by bracketing instead.
    pub fn zeros_in_period(&self) -> Result<Vec<Zero>, TrigError> {
        if self.is_zero() {
            return Err(TrigError::IdenticallyZero);
        }
        let r = self.amplitude();
        let scale = self.c0.abs().max(r);
        if r <= 1e-15 * scale {
            // Nonzero constant.
            return Ok(Vec::new());
        }
        let deriv = self.derivative();
        let mult_tol = 1e-9 * (1.0 + r);

        let mut out = Vec::with_capacity(2);
        if self.c0.abs() >= r {
            // The extremum `c0 - sign(c0)·r` either misses zero or touches it
            // within rounding; a touch is a double zero.
            if self.c0.abs() - r <= 4.0 * f64::EPSILON * scale {
                let phi = self.c2.atan2(self.c1);
                let ext = if self.c0 > 0.0 { phi + PI } else { phi };
                out.push(Zero { t: wrap(ext), multiplicity: Multiplicity::Double });
            }
            return Ok(out);
        }

        let qa = self.c0 - self.c1;
        let qb = 2.0 * self.c2;
        let qc = self.c0 + self.c1;
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
        let sq = disc.sqrt();
        let mut cands: Vec<f64> = Vec::with_capacity(2);
        // Stable quadratic roots; the big root is replaced by bracketing near π
        // when the leading coefficient is negligible.
        let q = -0.5 * (qb + qb.signum_or_one() * sq);
        let near_pi = qa.abs() <= 1e-8 * scale;
        if q != 0.0 {
            let small = qc / q;
            cands.push(2.0 * small.atan());
            if !near_pi {
                cands.push(2.0 * (q / qa).atan());
            }
        } else if !near_pi {
            // qb = 0 and disc = 0: τ = 0 double, or qc = 0.
            cands.push(0.0);
        }
        if near_pi {
            cands.push(self.bracket_near_pi());
        }

        for t0 in cands {
            let t = wrap(self.polish(t0));
            if out.iter().any(|z: &Zero| circ_dist(z.t, t) < 1e-9) {
                continue;
            }
            let multiplicity = if deriv.eval(t).abs() < mult_tol {
                Multiplicity::Double
            } else {
                Multiplicity::Simple
            };
            out.push(Zero { t, multiplicity });
        }
        // A near-double pair that collapsed into one candidate is a double zero.
        if out.len() == 2 && circ_dist(out[0].t, out[1].t) < 1e-7 {
            out.truncate(1);
            out[0].multiplicity = Multiplicity::Double;
        }
        out.sort_by(|x, y| x.t.total_cmp(&y.t));
        Ok(out)
    }

    /// Newton polish with a guard against walking off a tangency.
    fn polish(&self, mut t: f64) -> f64 {
        let d = self.derivative();
        for _ in 0..4 {
            let f = self.eval(t);
            let fp = d.eval(t);
            if fp.abs() < 1e-300 {
                break;
            }
            let step = f / fp;
            if !step.is_finite() || step.abs() > 0.1 {
                break;
            }
            t -= step;
            if step.abs() < 1e-16 * (1.0 + t.abs()) {
                break;
            }
        }
        t
    }

    /// A sign change of `p` around `t = π` located by bisection.
    fn bracket_near_pi(&self) -> f64 {
        let (mut lo, mut hi) = (PI - 0.5, PI + 0.5);
        let flo = self.eval(lo);
        if flo == 0.0 {
            return lo;
        }
        if flo.signum() == self.eval(hi).signum() {
            // No sign change in the bracket: the root at π is a double one.
            return PI;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = self.eval(mid);
            if fm == 0.0 || hi - lo < 1e-16 {
                return mid;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}

impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Reduce to `[0, 2π)`.
pub fn wrap(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// The pair `(a, b)` after shifting time so that `b(0) = 0`, `b'(0) > 0`
/// and rescaling `x` so that `b = sin t + b0 (1 - cos t)`.
///
/// Original and normalized quantities are related by
/// `t_orig = s + time_shift` and `x_orig = x_scale · x_norm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedForm {
    pub a: TrigPoly,
    pub b0: f64,
    pub time_shift: f64,
    pub x_scale: f64,
    pub tbar: f64,
}

impl NormalizedForm {
    pub fn b(&self) -> TrigPoly {
        TrigPoly::normalized_b(self.b0)
    }

    /// Map a normalized time back to original time (not reduced mod 2π).
    pub fn to_original_time(&self, s: f64) -> f64 {
        s + self.time_shift
    }

    pub fn to_original_x(&self, x: f64) -> f64 {
        x * self.x_scale
    }

    /// Reconstruct the original `(a, b)` from the normalized pair.
    pub fn original(&self) -> (TrigPoly, TrigPoly) {
        let back = -self.time_shift;
        (self.a.shifted(back), self.b().scaled(self.x_scale).shifted(back))
    }
}

/// `t̄ = π + 2·atan(b0)`: the second zero of `sin t + b0(1 - cos t)`.
pub fn tbar_of(b0: f64) -> f64 {
    PI + 2.0 * b0.atan()
}

/// Shift and rescale so that `b` takes the canonical form.
pub fn normalize(a: &TrigPoly, b: &TrigPoly) -> Result<NormalizedForm, TrigError> {
    let zeros = match b.zeros_in_period() {
        Ok(z) => z,
        Err(TrigError::IdenticallyZero) => return Err(TrigError::NoSignChange),
        Err(e) => return Err(e),
    };
    let db = b.derivative();
    let tau0 = zeros
        .iter()
        .filter(|z| z.multiplicity == Multiplicity::Simple)
        .map(|z| z.t)
        .find(|&t| db.eval(t) > 0.0)
        .ok_or(TrigError::NoSignChange)?;
    let bs = b.shifted(tau0);
    // After the shift, bs = β0 + γ1 cos + γ2 sin with β0 + γ1 = bs(0) ≈ 0.
    let kappa = bs.c2;
    let b0 = b.c0 / kappa;
    Ok(NormalizedForm {
        a: a.shifted(tau0),
        b0,
        time_shift: tau0,
        x_scale: kappa,
        tbar: tbar_of(b0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_basic_values() {
        assert!((TrigPoly::new(0.0, 0.0, 1.0).eval(PI / 2.0) - 1.0).abs() < 1e-15);
        assert!(TrigPoly::new(1.0, 1.0, 0.0).eval(PI).abs() < 1e-15);
        assert!(TrigPoly::normalized_b(0.7).eval(0.0).abs() < 1e-15);
    }

    #[test]
    fn integrate_closed_forms() {
        let p = TrigPoly::new(0.3, -1.2, 2.5);
        assert!((p.integrate(0.0, TAU) - TAU * 0.3).abs() < 1e-13);
        assert!((TrigPoly::new(0.0, 0.0, 1.0).integrate(0.0, PI) - 2.0).abs() < 1e-15);
        assert!((TrigPoly::new(1.0, 0.0, 0.0).integrate(0.4, 1.9) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn zeros_of_sine() {
        let z = TrigPoly::new(0.0, 0.0, 1.0).zeros_in_period().unwrap();
        assert_eq!(z.len(), 2);
        assert!(z[0].t.abs() < 1e-15 && (z[1].t - PI).abs() < 1e-14);
        assert!(z.iter().all(|z| z.multiplicity == Multiplicity::Simple));
    }

    #[test]
    fn double_zero_of_one_minus_cos() {
        let z = TrigPoly::new(1.0, -1.0, 0.0).zeros_in_period().unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z[0].multiplicity, Multiplicity::Double);
        assert!(circ_dist(z[0].t, 0.0) < 1e-12);
    }

    #[test]
    fn zeros_of_normalized_b() {
        let z = TrigPoly::new(1.0, -1.0, 1.0).zeros_in_period().unwrap();
        assert_eq!(z.len(), 2);
        assert!(z[0].t.abs() < 1e-14);
        assert!((z[1].t - 1.5 * PI).abs() < 1e-13);
        assert!((tbar_of(1.0) - 1.5 * PI).abs() < 1e-14);
    }

    #[test]
    fn root_exactly_at_pi() {
        // 1 + cos t + sin t vanishes at π and 3π/2.
        let p = TrigPoly::new(1.0, 1.0, 1.0);
        let z = p.zeros_in_period().unwrap();
        assert_eq!(z.len(), 2);
        assert!((z[0].t - PI).abs() < 1e-13, "{z:?}");
        assert!((z[1].t - 1.5 * PI).abs() < 1e-13);
    }

    #[test]
    fn no_zeros_and_identically_zero() {
        assert!(TrigPoly::new(2.0, 1.0, 1.0).zeros_in_period().unwrap().is_empty());
        assert_eq!(TrigPoly::ZERO.zeros_in_period(), Err(TrigError::IdenticallyZero));
        assert!(TrigPoly::new(-3.0, 0.0, 0.0).zeros_in_period().unwrap().is_empty());
    }

    #[test]
    fn normalize_examples() {
        let a = TrigPoly::new(0.2, 0.5, -0.1);
        let n = normalize(&a, &TrigPoly::new(0.0, 0.0, 1.0)).unwrap();
        assert!(n.time_shift.abs() < 1e-15 && (n.x_scale - 1.0).abs() < 1e-15 && n.b0 == 0.0);

        let n = normalize(&a, &TrigPoly::new(0.0, 0.0, 2.0)).unwrap();
        assert!((n.x_scale - 2.0).abs() < 1e-15 && n.b0 == 0.0);

        let n = normalize(&a, &TrigPoly::new(0.0, 1.0, 0.0)).unwrap();
        assert!((n.time_shift - 1.5 * PI).abs() < 1e-14);
        assert!(n.b0.abs() < 1e-15 && (n.x_scale - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normalize_rejects_definite_b() {
        let a = TrigPoly::ZERO;
        assert_eq!(normalize(&a, &TrigPoly::new(1.0, -1.0, 0.0)), Err(TrigError::NoSignChange));
        assert_eq!(normalize(&a, &TrigPoly::new(2.0, 1.0, 0.0)), Err(TrigError::NoSignChange));
        assert_eq!(normalize(&a, &TrigPoly::ZERO), Err(TrigError::NoSignChange));
    }

    #[test]
    fn shift_and_reflect() {
        let p = TrigPoly::new(0.4, -0.8, 1.3);
        for &t in &[0.0, 0.7, 2.9, 5.5] {
            assert!((p.shifted(1.1).eval(t) - p.eval(t + 1.1)).abs() < 1e-14);
            assert!((p.reflected().eval(t) - p.eval(-t)).abs() < 1e-14);
        }
    }
}

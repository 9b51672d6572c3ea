//! Algebraic center detection.
//!
//! For `x' = a|x| + b` the displacement is affine, `d(x) = (A-1)x + B`, on
//! solutions that never leave `x > 0` and `(Ā-1)x + B̄` on those staying in
//! `x < 0`. A continuum of periodic solutions is therefore either a linear
//! center (one of the affine pieces vanishes) or a global one, and the latter
//! happens exactly when `a0 = 0` and `a`, `b` are proportional.

use crate::flow::{AbelEq, FlowError, Tolerances};
use crate::poincare::{displacement, half_map, linear_constants, Side};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterKind {
    None,
    LinearPositive,
    LinearNegative,
    Global,
}

/// Which of the defining conditions held.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterWitness {
    pub a0_zero: bool,
    pub b0_zero: bool,
    /// `|a1 b2 - a2 b1|` relative to the coefficient sizes.
    pub proportionality_residual: f64,
    pub proportional: bool,
    pub a_unit: bool,
    pub b_zero: bool,
    pub abar_unit: bool,
    pub bbar_zero: bool,
    /// `|T⁺(t) - (2π - t)|` at the middle of the positive hump, in the
    /// normalized frame; only computed for global centers with sign-changing `b`.
    pub symmetry_defect: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterClass {
    pub kind: CenterKind,
    pub witness: CenterWitness,
}

impl CenterClass {
    pub fn is_center(&self) -> bool {
        self.kind != CenterKind::None
    }
}

const REL_TOL: f64 = 1e-12;

fn norm3(c: [f64; 3]) -> f64 {
    c.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Classify the continuum of periodic solutions, if any.
///
/// Proportionality is tested on the raw coefficients: `b0` must vanish and
/// the oscillating parts must be parallel. `b ≡ 0` counts as proportional,
/// and so does `a ≡ 0` with mean-free `b`.
pub fn detect_center(eq: &AbelEq) -> CenterClass {
    let na = norm3(eq.a.coeffs());
    let nb = norm3(eq.b.coeffs());
    let a0_zero = eq.a.c0.abs() <= REL_TOL * na.max(1.0) || na == 0.0;
    let b0_zero = eq.b.c0.abs() <= REL_TOL * nb || nb == 0.0;
    let cross = eq.a.c1 * eq.b.c2 - eq.a.c2 * eq.b.c1;
    let cross_scale = na * nb;
    let proportionality_residual = if cross_scale == 0.0 { 0.0 } else { cross.abs() / cross_scale };
    let oscillating_parallel = proportionality_residual <= REL_TOL;
    // With a0 = 0, b ∝ a forces b0 = 0; for a ≡ 0 the equation is x' = b,
    // periodic exactly when b is mean-free.
    let proportional = nb == 0.0 || (b0_zero && (na == 0.0 || oscillating_parallel));

    let lc = linear_constants(eq);
    // Bound on ∫|b| e^{±∫a}: the oscillating part of a primitive of `a` never exceeds twice its amplitude.
    let b_scale = TAU * eq.b.max_abs() * (TAU * eq.a.c0.abs() + 2.0 * eq.a.amplitude()).exp();
    let zero_b = |v: f64| v.abs() <= 1e-11 * b_scale.max(f64::MIN_POSITIVE);
    let a_unit = a0_zero;
    let abar_unit = a0_zero;
    let b_zero = zero_b(lc.b);
    let bbar_zero = zero_b(lc.b_bar);

    let kind = if a0_zero && proportional {
        CenterKind::Global
    } else if a_unit && b_zero {
        CenterKind::LinearPositive
    } else if abar_unit && bbar_zero {
        CenterKind::LinearNegative
    } else {
        CenterKind::None
    };

    let symmetry_defect = if kind == CenterKind::Global {
        symmetry_defect(eq)
    } else {
        None
    };

    CenterClass {
        kind,
        witness: CenterWitness {
            a0_zero,
            b0_zero,
            proportionality_residual,
            proportional,
            a_unit,
            b_zero,
            abar_unit,
            bbar_zero,
            symmetry_defect,
        },
    }
}

fn symmetry_defect(eq: &AbelEq) -> Option<f64> {
    let nf = eq.normalize().ok()?;
    let neq = AbelEq::from_form(&nf);
    let t = 0.5 * nf.tbar;
    let tp = half_map(&neq, t, Side::Plus, &Tolerances::default()).ok()??;
    Some((tp - (TAU - t)).abs())
}

/// Half-width of the probe window used by [`verify_center_numeric`].
pub fn probe_window(eq: &AbelEq) -> f64 {
    1.0 + TAU * eq.b.max_abs()
}

/// `max |d(x)|` over `n_samples` equispaced points of the probe window.
pub fn verify_center_numeric(eq: &AbelEq, n_samples: usize) -> Result<f64, FlowError> {
    let w = probe_window(eq);
    let tol = Tolerances::tight();
    let n = n_samples.max(2);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let x = -w + 2.0 * w * i as f64 / (n - 1) as f64;
        worst = worst.max(displacement(eq, x, &tol)?.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq(a: [f64; 3], b: [f64; 3]) -> AbelEq {
        AbelEq::from_coeffs(a, b)
    }

    #[test]
    fn lambda_sine_is_global() {
        let c = detect_center(&eq([0.0, 0.0, 1.0], [0.0, 0.0, 2.0]));
        assert_eq!(c.kind, CenterKind::Global);
        assert!(c.witness.symmetry_defect.unwrap() < 1e-9);
    }

    #[test]
    fn zero_forcing_with_mean_free_a_is_global() {
        assert_eq!(detect_center(&eq([0.0, 1.0, 0.0], [0.0; 3])).kind, CenterKind::Global);
        assert_eq!(detect_center(&eq([1.0, 0.0, 0.0], [0.0; 3])).kind, CenterKind::None);
    }

    #[test]
    fn numeric_probe_agrees() {
        let g = eq([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]);
        assert!(verify_center_numeric(&g, 32).unwrap() < 1e-9);
        let p = eq([0.01, 0.0, 1.0], [0.0, 0.0, 1.0]);
        assert!(verify_center_numeric(&p, 32).unwrap() > 1e-4);
        let z = eq([0.0, 0.3, -0.2], [0.0; 3]);
        assert!(verify_center_numeric(&z, 32).unwrap() < 1e-12);
    }

    #[test]
    fn pure_forcing_needs_mean_free_b() {
        assert_eq!(detect_center(&eq([0.0; 3], [0.0, 0.3, 1.0])).kind, CenterKind::Global);
        assert_eq!(detect_center(&eq([0.0; 3], [0.2, 0.3, 1.0])).kind, CenterKind::None);
    }

    #[test]
    fn non_proportional_mean_free_is_not_global() {
        let c = detect_center(&eq([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]));
        assert_ne!(c.kind, CenterKind::Global);
    }
}

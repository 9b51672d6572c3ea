//! Upper bounds on the number of limit cycles and an audit of observed
//! counts against them.
//!
//! All bound arithmetic is exact. Observed counts are compared with the
//! chain of inequalities used to assemble the final bound:
//!
//! ```text
//! constant-sign cycles          <= 2
//! sign-changing cycles          <= tangencies + components + 2
//! total                         <= 27 + 3 + 2 + 2 = 34
//! total (generic parameters)    <= 15 + 3 + 2 + 2 = 22
//! ```

use crate::poincare::{CycleReport, ReportKind, SignClass};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundError {
    #[error("expected {n} degrees, got {got}")]
    DegreeCount { n: usize, got: usize },
}

/// Degrees of the two polynomials of the tangency system after the
/// half-angle substitution.
pub const TANGENCY_DEGREES: (u64, u64) = (3, 9);

/// Leading monomials of the Gröbner basis of the tangency ideal (grevlex),
/// as exponent pairs `(i, j)` of `z1^i z2^j`.
pub const TANGENCY_LEADING_MONOMIALS: [(u32, u32); 4] = [(6, 0), (2, 1), (1, 5), (0, 6)];

/// Maximal number of connected components of the cubic `m = 0` (Harnack).
pub const COMPONENT_BOUND: u64 = 3;

/// Cycles that never change sign: at most one positive and one negative.
pub const CONSTANT_SIGN_BOUND: u64 = 2;

/// Passing from intersections of `h = 0` and `m = 0` to sign-changing cycles.
pub const CHAIN_SLACK: u64 = 2;

/// `m_1 ⋯ m_n (Σ m_i + ρ + 1)^(ρ+k) 2^(ρ + (ρ+k)(ρ+k-1)/2)`, the Khovanskii
/// bound for `n` equations in `n` unknowns with `k` exponentials and `ρ`
/// sine/cosine pairs.
pub fn khovanskii_bound(n: usize, degrees: &[u64], k: u64, rho: u64) -> Result<BigUint, BoundError> {
    if degrees.len() != n {
        return Err(BoundError::DegreeCount { n, got: degrees.len() });
    }
    let product: BigUint = degrees.iter().map(|&m| BigUint::from(m)).product();
    let sum: u64 = degrees.iter().sum();
    let e = rho + k;
    let base = BigUint::from(sum + rho + 1);
    let power = num_traits::pow(base, e as usize);
    let two_exp = rho + e * e.saturating_sub(1) / 2;
    let two = BigUint::one() << (two_exp as usize);
    Ok(product * power * two)
}

/// Bezout number of two plane curves.
pub fn bezout(deg_f: u64, deg_g: u64) -> u64 {
    deg_f * deg_g
}

/// `dim C[z1, z2] / <leading monomials>`: the number of standard monomials.
/// Infinite quotients (no pure power of one of the variables) return `None`.
pub fn standard_monomial_count(leading: &[(u32, u32)]) -> Option<u64> {
    let x_cap = leading.iter().filter(|m| m.1 == 0).map(|m| m.0).min()?;
    let y_cap = leading.iter().filter(|m| m.0 == 0).map(|m| m.1).min()?;
    let mut count = 0;
    for i in 0..x_cap {
        for j in 0..y_cap {
            if !leading.iter().any(|&(a, b)| i >= a && j >= b) {
                count += 1;
            }
        }
    }
    Some(count)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Khovanskii bound for `h = m = 0` on one square of side `π/√2`.
    pub khovanskii_region: u64,
    /// Four squares cover the quarter `(0, π) × (π, 2π)`.
    pub khovanskii_total: u64,
    /// `khovanskii_total + 2 + 2`.
    pub coarse_total: u64,
    pub bezout_tangency: u64,
    pub groebner_tangency: u64,
    pub component_bound: u64,
    pub assembled_bezout: u64,
    pub assembled_groebner: u64,
}

pub fn paper_bounds() -> BoundReport {
    // h and m are of degree one in t, x and the sines/cosines of t, x, x+t, x-t.
    let region = khovanskii_bound(2, &[1, 1], 0, 4)
        .expect("two degrees for two equations")
        .to_u64()
        .expect("fits in u64");
    let total = 4 * region;
    let bezout_tangency = bezout(TANGENCY_DEGREES.0, TANGENCY_DEGREES.1);
    let groebner_tangency =
        standard_monomial_count(&TANGENCY_LEADING_MONOMIALS).expect("zero-dimensional ideal");
    let tail = COMPONENT_BOUND + CHAIN_SLACK + CONSTANT_SIGN_BOUND;
    BoundReport {
        khovanskii_region: region,
        khovanskii_total: total,
        coarse_total: total + CHAIN_SLACK + CONSTANT_SIGN_BOUND,
        bezout_tangency,
        groebner_tangency,
        component_bound: COMPONENT_BOUND,
        assembled_bezout: bezout_tangency + tail,
        assembled_groebner: groebner_tangency + tail,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Bounds on the number of limit cycles. A failure here contradicts the
    /// final theorem.
    Cycles,
    /// Intermediate geometric bounds (components, tangency points).
    Geometry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub kind: CheckKind,
    pub observed: u64,
    pub bound: u64,
    pub pass: bool,
    /// `bound - observed`; negative on failure.
    pub margin: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditVerdict {
    /// The equation has a center, so nothing is counted.
    pub vacuous: bool,
    pub generic: bool,
    pub checks: Vec<AuditCheck>,
    /// No `Cycles` check failed.
    pub pass: bool,
    /// Names of failed `Cycles` checks.
    pub violations: Vec<String>,
    /// Names of failed `Geometry` checks.
    pub geometry_failures: Vec<String>,
}

fn check(name: &str, kind: CheckKind, observed: u64, bound: u64) -> AuditCheck {
    AuditCheck {
        name: name.to_string(),
        kind,
        observed,
        bound,
        pass: observed <= bound,
        margin: bound as i64 - observed as i64,
    }
}

/// Compare one equation's observed counts with the bound chain. The
/// generic-only checks (15 tangencies, total 22) are listed only when
/// `generic` holds.
pub fn audit(report: &CycleReport, tangency_count: usize, component_count: usize, generic: bool) -> AuditVerdict {
    let vacuous = report.kind == ReportKind::Center;
    let (sc, cs) = if vacuous {
        (0, 0)
    } else {
        (report.count(SignClass::SignChanging) as u64, report.constant_sign_count() as u64)
    };
    let total = sc + cs;
    let tang = tangency_count as u64;
    let comp = component_count as u64;
    let bounds = paper_bounds();

    let mut checks = vec![
        check("constant_sign <= 2", CheckKind::Cycles, cs, CONSTANT_SIGN_BOUND),
        check(
            "sign_changing <= tangencies + components + 2",
            CheckKind::Cycles,
            sc,
            tang + comp + CHAIN_SLACK,
        ),
        check("sign_changing <= 27 + 3 + 2", CheckKind::Cycles, sc, bounds.assembled_bezout - CONSTANT_SIGN_BOUND),
        check("total <= 34", CheckKind::Cycles, total, bounds.assembled_bezout),
        check("total <= coarse bound", CheckKind::Cycles, total, bounds.coarse_total),
        check("tangencies <= 27", CheckKind::Geometry, tang, bounds.bezout_tangency),
        check("components <= 3", CheckKind::Geometry, comp, COMPONENT_BOUND),
    ];
    if generic {
        checks.push(check("total <= 22", CheckKind::Cycles, total, bounds.assembled_groebner));
        checks.push(check("tangencies <= 15", CheckKind::Geometry, tang, bounds.groebner_tangency));
    }
    let failed = |kind: CheckKind| -> Vec<String> {
        checks.iter().filter(|c| c.kind == kind && !c.pass).map(|c| c.name.clone()).collect()
    };
    let violations = failed(CheckKind::Cycles);
    let geometry_failures = failed(CheckKind::Geometry);
    AuditVerdict { vacuous, generic, pass: violations.is_empty(), checks, violations, geometry_failures }
}

/// Audit for equations outside the curve reduction (`a0 = 0`, or `b` of one
/// sign): only the counts that do not need tangencies or components.
pub fn audit_without_geometry(report: &CycleReport) -> AuditVerdict {
    let vacuous = report.kind == ReportKind::Center;
    let (sc, cs) = if vacuous {
        (0, 0)
    } else {
        (report.count(SignClass::SignChanging) as u64, report.constant_sign_count() as u64)
    };
    let bounds = paper_bounds();
    let checks = vec![
        check("constant_sign <= 2", CheckKind::Cycles, cs, CONSTANT_SIGN_BOUND),
        check("total <= 34", CheckKind::Cycles, sc + cs, bounds.assembled_bezout),
    ];
    let violations: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    AuditVerdict { vacuous, generic: false, pass: violations.is_empty(), checks, violations, geometry_failures: Vec::new() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn khovanskii_examples() {
        let b = khovanskii_bound(2, &[1, 1], 0, 4).unwrap();
        assert_eq!(b, BigUint::from(7u64.pow(4) * 1024));
        assert_eq!(b, BigUint::from(2_458_624u64));
        assert_eq!(khovanskii_bound(1, &[1], 0, 0).unwrap(), BigUint::one());
        assert_eq!(khovanskii_bound(2, &[1, 1], 0, 0).unwrap(), BigUint::one());
        assert!(khovanskii_bound(2, &[1], 0, 0).is_err());
    }

    #[test]
    fn khovanskii_is_monotone() {
        for rho in 0..6 {
            for m in 1..4 {
                let here = khovanskii_bound(2, &[m, 1], 1, rho).unwrap();
                assert!(khovanskii_bound(2, &[m + 1, 1], 1, rho).unwrap() >= here);
                assert!(khovanskii_bound(2, &[m, 1], 1, rho + 1).unwrap() >= here);
                assert!(khovanskii_bound(2, &[m, 1], 2, rho).unwrap() >= here);
            }
        }
    }

    #[test]
    fn large_arguments_stay_exact() {
        let b = khovanskii_bound(3, &[5, 7, 9], 6, 10).unwrap();
        let expected = BigUint::from(315u64) * num_traits::pow(BigUint::from(32u64), 16) * (BigUint::one() << 130usize);
        assert_eq!(b, expected);
    }

    #[test]
    fn assembled_values() {
        let r = paper_bounds();
        assert_eq!(r.khovanskii_region, 2_458_624);
        assert_eq!(r.khovanskii_total, 7u64.pow(4) << 12);
        assert_eq!(r.coarse_total, 9_834_500);
        assert_eq!(r.coarse_total, 4 * r.khovanskii_region + 4);
        assert_eq!(r.bezout_tangency, 27);
        assert_eq!(r.groebner_tangency, 15);
        assert_eq!(r.assembled_bezout, 34);
        assert_eq!(r.assembled_groebner, 22);
    }

    #[test]
    fn staircase_needs_both_pure_powers() {
        assert_eq!(standard_monomial_count(&[(2, 0), (0, 3)]), Some(6));
        assert_eq!(standard_monomial_count(&[(2, 0), (1, 1)]), None);
    }
}

//! One-call analysis of a single equation: everything the library knows
//! about it, in a serializable report.

use crate::bounds::{audit, audit_without_geometry, paper_bounds, AuditVerdict, BoundReport};
use crate::centers::CenterClass;
use crate::curves::{contour_m, solve_tangency_params, CurveError, CurveParams, TangencyReport};
use crate::flow::AbelEq;
use crate::poincare::{find_cycles, CycleReport, SearchConfig, SignClass};
use crate::trigpoly::NormalizedForm;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bumped whenever a field of [`AnalysisReport`] changes meaning or name.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("coefficient {name} is not finite")]
    NonFinite { name: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub search: SearchConfig,
    /// Cells per side of the marching-squares grid for the component count.
    pub component_grid: usize,
    /// Skip the tangency and component computations.
    pub skip_geometry: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { search: SearchConfig::default(), component_grid: 512, skip_geometry: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryReport {
    pub params: CurveParams,
    pub component_count: usize,
    pub tangency: TangencyReport,
    /// `|a0| > 1e-3`, discriminant `> 1e-6` and no clustered resultant roots.
    pub generic: bool,
}

impl GeometryReport {
    pub fn tangency_count(&self) -> usize {
        self.tangency.count()
    }
}

/// Worst residuals across the report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest `|d(x0)|` over reported cycles.
    pub max_cycle_residual: f64,
    pub unresolved_roots: usize,
    pub max_tangency_m_residual: f64,
    pub max_tangency_minor_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub equation: AbelEq,
    pub normalization: Option<NormalizedForm>,
    pub center: CenterClass,
    pub cycles: Option<CycleReport>,
    pub cycle_error: Option<String>,
    pub geometry: Option<GeometryReport>,
    /// Why geometry is absent (`a0 = 0`, `b` of one sign, numerical failure).
    pub geometry_note: Option<String>,
    pub bounds: BoundReport,
    pub audit: Option<AuditVerdict>,
    pub diagnostics: Diagnostics,
    /// Some numerical stage failed or fell back; the report is incomplete.
    pub partial: bool,
}

impl AnalysisReport {
    pub fn cycle_count(&self, class: SignClass) -> usize {
        self.cycles.as_ref().map_or(0, |r| r.count(class))
    }

    /// `VIOLATION` when a cycle bound failed.
    pub fn violation(&self) -> bool {
        self.audit.as_ref().is_some_and(|a| !a.pass)
    }
}

fn check_finite(eq: &AbelEq) -> Result<(), AnalysisError> {
    const NAMES: [&str; 6] = ["a0", "a1", "a2", "b0", "b1", "b2"];
    let all = eq.a.coeffs().into_iter().chain(eq.b.coeffs());
    for (v, name) in all.zip(NAMES) {
        if !v.is_finite() {
            return Err(AnalysisError::NonFinite { name });
        }
    }
    Ok(())
}

pub fn analyze(eq: &AbelEq, opts: &AnalysisOptions) -> Result<AnalysisReport, AnalysisError> {
    check_finite(eq)?;
    let center = crate::centers::detect_center(eq);
    let normalization = eq.normalize().ok();
    let mut partial = false;

    let (cycles, cycle_error) = match find_cycles(eq, &opts.search) {
        Ok(r) => (Some(r), None),
        Err(e) => {
            partial = true;
            (None, Some(e.to_string()))
        }
    };

    let (geometry, geometry_note) = if opts.skip_geometry {
        (None, Some("skipped".to_string()))
    } else {
        match geometry(eq, opts.component_grid) {
            Ok(g) => {
                partial |= g.tangency.partial;
                (Some(g), None)
            }
            Err(e) => {
                // a0 = 0 and b of one sign are outside the reduction, not failures.
                partial |= !matches!(e, CurveError::A0Zero | CurveError::Normalize(_));
                (None, Some(e.to_string()))
            }
        }
    };

    let audit = cycles.as_ref().map(|c| match &geometry {
        Some(g) => audit(c, g.tangency_count(), g.component_count, g.generic),
        None => audit_without_geometry(c),
    });

    let mut diagnostics = Diagnostics::default();
    if let Some(c) = &cycles {
        diagnostics.max_cycle_residual = c.cycles.iter().map(|c| c.residual).fold(0.0, f64::max);
        diagnostics.unresolved_roots = c.unresolved.len();
    }
    if let Some(g) = &geometry {
        for q in &g.tangency.points {
            diagnostics.max_tangency_m_residual = diagnostics.max_tangency_m_residual.max(q.m_residual);
            diagnostics.max_tangency_minor_residual = diagnostics.max_tangency_minor_residual.max(q.minor_residual);
        }
    }

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        equation: *eq,
        normalization,
        center,
        cycles,
        cycle_error,
        geometry,
        geometry_note,
        bounds: paper_bounds(),
        audit,
        diagnostics,
        partial,
    })
}

fn geometry(eq: &AbelEq, grid: usize) -> Result<GeometryReport, CurveError> {
    let params = CurveParams::from_eq(eq)?;
    let tangency = solve_tangency_params(&params)?;
    let component_count = contour_m(&params, grid, false)?.count();
    let generic = tangency.genericity.is_generic();
    Ok(GeometryReport { params, component_count, tangency, generic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poincare::ReportKind;

    #[test]
    fn lambda_sine_is_a_global_center() {
        let r = analyze(&AbelEq::from_coeffs([0.0, 0.0, 1.0], [0.0, 0.0, 2.0]), &AnalysisOptions::default()).unwrap();
        assert_eq!(r.cycles.as_ref().unwrap().kind, ReportKind::Center);
        assert!(r.geometry.is_none());
        assert!(r.audit.as_ref().unwrap().vacuous);
        assert!(!r.partial);
    }

    #[test]
    fn two_constant_sign_cycles() {
        let r = analyze(&AbelEq::from_coeffs([-1.0, 0.0, 0.0], [2.0, 1.0, 0.0]), &AnalysisOptions::default()).unwrap();
        assert_eq!(r.cycles.as_ref().unwrap().cycles.len(), 2);
        assert!(r.audit.as_ref().unwrap().pass);
    }

    #[test]
    fn zero_forcing_has_the_zero_solution() {
        let r = analyze(&AbelEq::from_coeffs([1.0, 0.0, 0.0], [0.0; 3]), &AnalysisOptions::default()).unwrap();
        let c = r.cycles.as_ref().unwrap();
        assert_eq!(c.cycles.len(), 1);
        assert_eq!(c.cycles[0].x0, 0.0);
        assert!(!r.center.is_center());
    }

    #[test]
    fn rejects_non_finite_input() {
        let e = analyze(&AbelEq::from_coeffs([f64::NAN, 0.0, 0.0], [0.0; 3]), &AnalysisOptions::default());
        assert_eq!(e.unwrap_err(), AnalysisError::NonFinite { name: "a0" });
    }

    #[test]
    fn generic_equation_has_geometry() {
        let r = analyze(&AbelEq::from_coeffs([0.4, 1.1, -0.7], [0.2, 0.5, 1.0]), &AnalysisOptions::default()).unwrap();
        let g = r.geometry.as_ref().expect("geometry");
        assert!(g.component_count >= 1);
        assert!(r.audit.as_ref().unwrap().checks.len() >= 7);
    }
}

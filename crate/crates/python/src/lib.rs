//! Python bindings. Structured results (reports, bounds, scan rows) come
//! back as plain dicts built from the same serde representation the CLI
//! prints, so the two never disagree on field names.

use abelcycles::bounds::{khovanskii_bound as kh_bound, paper_bounds as bounds_report};
use abelcycles::centers::detect_center;
use abelcycles::curves::{contour_m, solve_tangency_params, CurveParams};
use abelcycles::flow::{period_map, AbelEq, Tolerances};
use abelcycles::oracle::{brute_count, OracleConfig};
use abelcycles::poincare::{displacement, find_cycles, half_map, SearchConfig, Side};
use abelcycles::report::{analyze, AnalysisOptions};
use abelcycles::sweep::{scan as run_scan, GridSpec};
use num_bigint::BigUint;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// serde value -> Python object, through the `json` module.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(runtime_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn snake<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// `x' = a(t)|x| + b(t)` with `a = a0 + a1 cos t + a2 sin t`, same for `b`.
///
/// `b` is either three coefficients or a single `b0`, meaning
/// `sin t + b0 (1 - cos t)`.
#[pyclass(frozen, module = "pyabelcycles")]
struct Equation {
    eq: AbelEq,
}

#[derive(FromPyObject)]
enum BArg {
    Coeffs([f64; 3]),
    Normalized(f64),
}

#[pyclass(frozen, get_all, module = "pyabelcycles")]
struct Cycle {
    x0: f64,
    /// "positive", "negative", "sign_changing" or "zero".
    sign_class: String,
    multiplier: f64,
    hyperbolic: bool,
    crossings: Option<(f64, f64)>,
    residual: f64,
}

#[pymethods]
impl Cycle {
    fn __repr__(&self) -> String {
        format!("Cycle(x0={}, sign_class='{}', multiplier={})", self.x0, self.sign_class, self.multiplier)
    }
}

fn tol(rel: f64, abs: f64) -> PyResult<Tolerances> {
    if !(rel > 0.0 && abs >= 0.0) {
        return Err(value_err("need rel > 0 and abs >= 0"));
    }
    Ok(Tolerances::new(rel, abs))
}

#[pymethods]
impl Equation {
    #[new]
    fn new(a: [f64; 3], b: BArg) -> PyResult<Self> {
        let b = match b {
            BArg::Coeffs(c) => c,
            BArg::Normalized(b0) => [b0, 0.0 - b0, 1.0],
        };
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(value_err("coefficients must be finite"));
        }
        Ok(Equation { eq: AbelEq::from_coeffs(a, b) })
    }

    #[getter]
    fn a(&self) -> [f64; 3] {
        self.eq.a.coeffs()
    }

    #[getter]
    fn b(&self) -> [f64; 3] {
        self.eq.b.coeffs()
    }

    fn __repr__(&self) -> String {
        format!("Equation(a={:?}, b={:?})", self.eq.a.coeffs(), self.eq.b.coeffs())
    }

    /// `P(x) - x` for the solution with `x(0) = x`.
    #[pyo3(signature = (x, rel=1e-10, abs=1e-12))]
    fn displacement(&self, x: f64, rel: f64, abs: f64) -> PyResult<f64> {
        displacement(&self.eq, x, &tol(rel, abs)?).map_err(runtime_err)
    }

    #[pyo3(signature = (x, rel=1e-10, abs=1e-12))]
    fn period_map(&self, x: f64, rel: f64, abs: f64) -> PyResult<f64> {
        period_map(&self.eq, x, &tol(rel, abs)?).map_err(runtime_err)
    }

    /// Half-return map from a zero at `t1`; `side` is "plus" or "minus".
    /// `None` when the orbit does not return inside the period.
    #[pyo3(signature = (t1, side, rel=1e-10, abs=1e-12))]
    fn half_map(&self, t1: f64, side: &str, rel: f64, abs: f64) -> PyResult<Option<f64>> {
        let side = match side {
            "plus" => Side::Plus,
            "minus" => Side::Minus,
            other => return Err(value_err(format!("side must be 'plus' or 'minus', not {other:?}"))),
        };
        half_map(&self.eq, t1, side, &tol(rel, abs)?).map_err(runtime_err)
    }

    /// "none", "linear_positive", "linear_negative" or "global".
    fn center_kind(&self) -> String {
        snake(&detect_center(&self.eq).kind)
    }

    /// Isolated limit cycles. Empty for a global center.
    fn cycles(&self) -> PyResult<Vec<Cycle>> {
        let r = find_cycles(&self.eq, &SearchConfig::default()).map_err(runtime_err)?;
        Ok(r.cycles
            .iter()
            .map(|c| Cycle {
                x0: c.x0,
                sign_class: snake(&c.sign_class),
                multiplier: c.multiplier,
                hyperbolic: c.hyperbolic,
                crossings: c.crossings_original,
                residual: c.residual,
            })
            .collect())
    }

    /// The full report as a dict, with the same fields as `abelcycles analyze`.
    #[pyo3(signature = (component_grid=512))]
    fn analyze<'py>(&self, py: Python<'py>, component_grid: usize) -> PyResult<Bound<'py, PyAny>> {
        let opts = AnalysisOptions { component_grid: component_grid.max(4), ..AnalysisOptions::default() };
        let r = py.detach(|| analyze(&self.eq, &opts)).map_err(value_err)?;
        to_py(py, &r)
    }

    /// Tangency points `(t, x)` in the normalized frame.
    fn tangency_points(&self) -> PyResult<Vec<(f64, f64)>> {
        let p = CurveParams::from_eq(&self.eq).map_err(value_err)?;
        let r = solve_tangency_params(&p).map_err(runtime_err)?;
        Ok(r.points.iter().map(|q| (q.t, q.x)).collect())
    }

    /// Polylines of `m = 0` on `(0, 2π)²`, one list of `(t, x)` per component.
    #[pyo3(signature = (grid=512))]
    fn m_components(&self, grid: usize) -> PyResult<Vec<Vec<(f64, f64)>>> {
        let p = CurveParams::from_eq(&self.eq).map_err(value_err)?;
        let c = contour_m(&p, grid, false).map_err(runtime_err)?;
        Ok(c.components.into_iter().map(|pl| pl.points).collect())
    }

    /// Brute-force count by dense sampling: `(roots, continuum_intervals)`.
    #[pyo3(signature = (window=None, grid=4096))]
    fn brute_count(&self, py: Python<'_>, window: Option<f64>, grid: usize) -> PyResult<(Vec<f64>, Vec<(f64, f64)>)> {
        let cfg = OracleConfig { grid, ..OracleConfig::default() };
        let r = py.detach(|| brute_count(&self.eq, window, &cfg)).map_err(value_err)?;
        Ok((r.roots, r.continuum))
    }
}

/// `m1 ⋯ mn (Σ mi + ρ + 1)^(ρ+k) 2^(ρ + (ρ+k)(ρ+k-1)/2)` as an exact int.
#[pyfunction]
fn khovanskii_bound(n: usize, degrees: Vec<u64>, k: u64, rho: u64) -> PyResult<BigUint> {
    kh_bound(n, &degrees, k, rho).map_err(value_err)
}

#[pyfunction]
fn paper_bounds(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &bounds_report())
}

/// Analyze every cell of a grid such as "a0=-1:1:3;a2=1;b0=-1:1:3".
/// Rows come back in cell order for any `jobs`.
#[pyfunction]
#[pyo3(signature = (grid, jobs=0, component_grid=512))]
fn scan<'py>(py: Python<'py>, grid: &str, jobs: usize, component_grid: usize) -> PyResult<Bound<'py, PyAny>> {
    let spec = GridSpec::parse(grid).map_err(value_err)?;
    let opts = AnalysisOptions { component_grid: component_grid.max(4), ..AnalysisOptions::default() };
    let rows = py.detach(|| run_scan(&spec, &opts, jobs, false)).map_err(runtime_err)?;
    to_py(py, &rows)
}

#[pymodule]
fn pyabelcycles(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Equation>()?;
    m.add_class::<Cycle>()?;
    m.add_function(wrap_pyfunction!(khovanskii_bound, m)?)?;
    m.add_function(wrap_pyfunction!(paper_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    Ok(())
}

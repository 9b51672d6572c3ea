//! Parameter sweeps over a rectangular grid of coefficients.
//!
//! A grid spec is a `;`-separated list of `name=value` or
//! `name=lo:hi:n` items over the names `a0 a1 a2 b0 b1 b2`, e.g.
//! `a0=-1:1:3;a2=1;b0=-1:1:3`. Missing `a` coefficients are zero. When
//! neither `b1` nor `b2` is given, `b` takes the normalized form
//! `sin t + b0 (1 - cos t)`; otherwise missing `b` coefficients are zero.
//!
//! Cells are enumerated in row-major order with `a0` varying slowest, and
//! results always come back in that order whatever the thread count.

use crate::flow::AbelEq;
use crate::poincare::SignClass;
use crate::report::{analyze, AnalysisError, AnalysisOptions, AnalysisReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

pub const COEFF_NAMES: [&str; 6] = ["a0", "a1", "a2", "b0", "b1", "b2"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("grid item `{0}` is not of the form name=value or name=lo:hi:n")]
    Syntax(String),
    #[error("unknown coefficient `{0}` (expected one of a0 a1 a2 b0 b1 b2)")]
    UnknownName(String),
    #[error("coefficient `{0}` given twice")]
    Duplicate(String),
    #[error("bad number `{0}`")]
    Number(String),
    #[error("`{0}` needs at least one point")]
    Empty(String),
    #[error("empty grid spec")]
    NoItems,
    #[error("could not start a thread pool: {0}")]
    Pool(String),
}

/// Values of one coefficient across the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// One axis per coefficient, in the order of [`COEFF_NAMES`].
    pub axes: Vec<Axis>,
    pub normalized_b: bool,
}

fn number(s: &str) -> Result<f64, GridError> {
    let v: f64 = s.trim().parse().map_err(|_| GridError::Number(s.trim().to_string()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GridError::Number(s.trim().to_string()))
    }
}

impl GridSpec {
    pub fn parse(spec: &str) -> Result<Self, GridError> {
        let mut given: [Option<Vec<f64>>; 6] = Default::default();
        let mut any = false;
        for item in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            any = true;
            let (name, rhs) = item
                .split_once('=')
                .ok_or_else(|| GridError::Syntax(item.to_string()))?;
            let name = name.trim();
            let idx = COEFF_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| GridError::UnknownName(name.to_string()))?;
            if given[idx].is_some() {
                return Err(GridError::Duplicate(name.to_string()));
            }
            let parts: Vec<&str> = rhs.split(':').collect();
            let values = match parts.as_slice() {
                [v] => vec![number(v)?],
                [lo, hi, n] => {
                    let (lo, hi) = (number(lo)?, number(hi)?);
                    let n: usize = n.trim().parse().map_err(|_| GridError::Number(n.trim().to_string()))?;
                    match n {
                        0 => return Err(GridError::Empty(name.to_string())),
                        1 => vec![lo],
                        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
                    }
                }
                _ => return Err(GridError::Syntax(item.to_string())),
            };
            given[idx] = Some(values);
        }
        if !any {
            return Err(GridError::NoItems);
        }
        let normalized_b = given[4].is_none() && given[5].is_none();
        let axes = COEFF_NAMES
            .iter()
            .zip(given)
            .map(|(name, v)| Axis {
                name: name.to_string(),
                values: v.unwrap_or_else(|| vec![0.0]),
            })
            .collect();
        Ok(GridSpec { axes, normalized_b })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coefficients `(a0, a1, a2, b0, b1, b2)` of cell `index`.
    pub fn cell(&self, index: usize) -> [f64; 6] {
        let mut out = [0.0; 6];
        let mut rest = index;
        for k in (0..6).rev() {
            let n = self.axes[k].values.len();
            out[k] = self.axes[k].values[rest % n];
            rest /= n;
        }
        if self.normalized_b {
            out[4] = 0.0 - out[3]; // no negative zero in the output
            out[5] = 1.0;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub index: usize,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub center: String,
    pub positive: usize,
    pub negative: usize,
    pub sign_changing: usize,
    pub zero: usize,
    pub total: usize,
    /// Empty when the geometry is not available.
    pub tangencies: Option<usize>,
    pub components: Option<usize>,
    pub generic: bool,
    pub audit_pass: bool,
    /// `VIOLATION` when a cycle bound failed, empty otherwise.
    pub violation: String,
    /// Failed geometric sub-bounds, `|`-separated.
    pub geometry_failures: String,
    pub partial: bool,
    pub error: String,
    /// Only filled in when timing is requested; it would break byte-identical reruns.
    pub wall_ms: Option<f64>,
}

pub fn run_cell(spec: &GridSpec, index: usize, opts: &AnalysisOptions, timing: bool) -> ScanRow {
    let c = spec.cell(index);
    let start = Instant::now();
    let eq = AbelEq::from_coeffs([c[0], c[1], c[2]], [c[3], c[4], c[5]]);
    let mut row = ScanRow::summarize(index, c, analyze(&eq, opts));
    if timing {
        row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    row
}

impl ScanRow {
    /// Flatten an analysis result into one row.
    pub fn summarize(index: usize, c: [f64; 6], result: Result<AnalysisReport, AnalysisError>) -> ScanRow {
        let mut row = ScanRow {
            index,
            a0: c[0],
            a1: c[1],
            a2: c[2],
            b0: c[3],
            b1: c[4],
            b2: c[5],
            center: String::new(),
            positive: 0,
            negative: 0,
            sign_changing: 0,
            zero: 0,
            total: 0,
            tangencies: None,
            components: None,
            generic: false,
            audit_pass: false,
            violation: String::new(),
            geometry_failures: String::new(),
            partial: false,
            error: String::new(),
            wall_ms: None,
        };
        match result {
            Ok(r) => {
                row.center = serde_plain_kind(&r.center.kind);
                row.positive = r.cycle_count(SignClass::Positive);
                row.negative = r.cycle_count(SignClass::Negative);
                row.sign_changing = r.cycle_count(SignClass::SignChanging);
                row.zero = r.cycle_count(SignClass::Zero);
                row.total = row.positive + row.negative + row.sign_changing + row.zero;
                if let Some(g) = &r.geometry {
                    row.tangencies = Some(g.tangency_count());
                    row.components = Some(g.component_count);
                    row.generic = g.generic;
                }
                if let Some(a) = &r.audit {
                    row.audit_pass = a.pass;
                    row.geometry_failures = a.geometry_failures.join("|");
                }
                if r.violation() {
                    row.violation = "VIOLATION".to_string();
                }
                row.partial = r.partial;
                row.error = r.cycle_error.unwrap_or_default();
            }
            Err(e) => {
                row.partial = true;
                row.error = e.to_string();
            }
        }
        row
    }
}

fn serde_plain_kind(kind: &crate::centers::CenterKind) -> String {
    use crate::centers::CenterKind::*;
    match kind {
        None => "none",
        LinearPositive => "linear_positive",
        LinearNegative => "linear_negative",
        Global => "global",
    }
    .to_string()
}

/// Run every cell on `jobs` threads (`0` = rayon's default). Rows are in
/// cell order.
pub fn scan(spec: &GridSpec, opts: &AnalysisOptions, jobs: usize, timing: bool) -> Result<Vec<ScanRow>, GridError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| GridError::Pool(e.to_string()))?;
    Ok(pool.install(|| {
        (0..spec.len())
            .into_par_iter()
            .map(|i| run_cell(spec, i, opts, timing))
            .collect()
    }))
}

//! Sturm sequences with certified sign evaluation, real-root counting,
//! isolation and refinement.

use super::unipoly::UniPoly;
use super::xfloat::XFloat;
use super::{RootError, PREC_DEFAULT, PREC_HIGH};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// `p0 = p, p1 = p', p_{k+1} = -rem(p_{k-1}, p_k)`, each remainder rescaled
/// to unit size. A remainder whose coefficients all sit inside their error
/// bounds terminates the chain; the last member is then `gcd(p, p')`.
#[derive(Debug, Clone)]
pub struct SturmChain {
    polys: Vec<UniPoly>,
}

impl SturmChain {
    pub fn new(p: &UniPoly) -> Result<Self, RootError> {
        if p.is_zero() {
            return Err(RootError::ZeroPolynomial);
        }
        let mut polys = vec![p.normalized()];
        let d = p.derivative();
        if !d.is_zero() {
            polys.push(d.normalized());
        }
        while polys.len() >= 2 {
            let k = polys.len();
            if polys[k - 1].degree() == Some(0) {
                break;
            }
            let (_, r) = polys[k - 2].div_rem(&polys[k - 1]);
            if r.is_zero() {
                break;
            }
            let minus_one = XFloat::from_f64(-1.0, r.prec());
            polys.push(r.scale(&minus_one).normalized());
        }
        Ok(SturmChain { polys })
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// The chain's last member, `gcd(p, p')` up to a constant.
    pub fn gcd(&self) -> &UniPoly {
        self.polys.last().unwrap()
    }

    /// `p` has no repeated complex roots (the gcd is a constant).
    pub fn squarefree(&self) -> bool {
        self.gcd().degree() == Some(0)
    }

    /// Number of sign variations at `z`. A vanishing inner member is
    /// harmless when its neighbours have opposite certified signs; any other
    /// uncertain sign is an error.
    pub fn variations(&self, z: &XFloat) -> Result<usize, RootError> {
        let signs: Vec<Result<i8, RootError>> = self.polys.iter().map(|p| p.sign_at(z)).collect();
        let mut kept: Vec<i8> = Vec::with_capacity(signs.len());
        for (k, s) in signs.iter().enumerate() {
            match s {
                Ok(v) => kept.push(*v),
                Err(e) => {
                    let inner = k > 0 && k + 1 < signs.len();
                    let flanked = inner
                        && matches!((&signs[k - 1], &signs[k + 1]), (Ok(a), Ok(b)) if *a != 0 && *a == -*b);
                    if !flanked {
                        return Err(e.clone());
                    }
                }
            }
        }
        Ok(count_changes(&kept))
    }

    pub fn variations_at_infinity(&self, toward_pos: bool) -> usize {
        let kept: Vec<i8> = self.polys.iter().map(|p| p.sign_at_infinity(toward_pos)).collect();
        count_changes(&kept)
    }

    fn variations_at(&self, pt: &Point) -> Result<usize, RootError> {
        match pt {
            Point::NegInf => Ok(self.variations_at_infinity(false)),
            Point::PosInf => Ok(self.variations_at_infinity(true)),
            Point::Finite(z) => self.variations(z),
        }
    }
}

fn count_changes(signs: &[i8]) -> usize {
    let mut prev = 0i8;
    let mut n = 0;
    for &s in signs {
        if s == 0 {
            continue;
        }
        if prev != 0 && s != prev {
            n += 1;
        }
        prev = s;
    }
    n
}

#[derive(Debug, Clone)]
enum Point {
    NegInf,
    Finite(XFloat),
    PosInf,
}

/// Exact number of distinct real roots of a squarefree `p` in `(lo, hi]`.
pub fn sturm_count(p: &UniPoly, lo: f64, hi: f64) -> Result<usize, RootError> {
    let chain = SturmChain::new(p)?;
    let prec = p.prec();
    let vlo = chain.variations_at(&to_point(lo, prec))?;
    let vhi = chain.variations_at(&to_point(hi, prec))?;
    Ok(vlo.saturating_sub(vhi))
}

fn to_point(v: f64, prec: usize) -> Point {
    if v == f64::NEG_INFINITY {
        Point::NegInf
    } else if v == f64::INFINITY {
        Point::PosInf
    } else {
        Point::Finite(XFloat::from_f64(v, prec))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: usize,
    /// Final bracket: the root lies in `(lo, hi]`.
    pub lo: f64,
    pub hi: f64,
}

/// How isolation intervals are split.
#[derive(Debug, Clone, Copy)]
enum Param {
    /// Split in `z` directly.
    Linear,
    /// Split in `θ` with `z = tan θ`, covering the whole real line.
    Angle,
}

impl Param {
    fn point(&self, s: f64, prec: usize) -> Point {
        match self {
            Param::Linear => to_point(s, prec),
            Param::Angle => {
                if s <= -FRAC_PI_2 {
                    Point::NegInf
                } else if s >= FRAC_PI_2 {
                    Point::PosInf
                } else {
                    Point::Finite(XFloat::from_f64(s.tan(), prec))
                }
            }
        }
    }
}

/// Isolating intervals `(s_lo, s_hi]` in the parameter, one root each.
fn isolate(chain: &SturmChain, param: Param, lo: f64, hi: f64, prec: usize) -> Result<Vec<(f64, f64)>, RootError> {
    let vlo = chain.variations_at(&param.point(lo, prec))?;
    let vhi = chain.variations_at(&param.point(hi, prec))?;
    let mut out = Vec::new();
    let mut stack = vec![(lo, hi, vlo, vhi)];
    const NUDGE: [f64; 5] = [0.5, 0.381966, 0.618034, 0.447214, 0.552786];
    while let Some((a, b, va, vb)) = stack.pop() {
        let n = va.saturating_sub(vb);
        if n == 0 {
            continue;
        }
        if n == 1 {
            out.push((a, b));
            continue;
        }
        let width = b - a;
        if width <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            return Err(RootError::AmbiguousSign { prec });
        }
        let mut split = None;
        for frac in NUDGE {
            let m = a + frac * width;
            match chain.variations_at(&param.point(m, prec)) {
                Ok(vm) => {
                    split = Some((m, vm));
                    break;
                }
                Err(_) => continue,
            }
        }
        let (m, vm) = split.ok_or(RootError::AmbiguousSign { prec })?;
        // Left half first in the output order.
        stack.push((m, b, vm, vb));
        stack.push((a, m, va, vm));
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(out)
}

/// Shrink a one-root bracket `(za, zb]` of `p` by Illinois steps on certified
/// signs until its width is below `tol·(1 + |z|)` or signs become ambiguous.
fn refine(p: &UniPoly, za: f64, zb: f64, tol: f64) -> (f64, f64, f64) {
    let prec = p.prec();
    let sign = |z: f64| p.sign_at(&XFloat::from_f64(z, prec));
    let val = |z: f64| p.eval(&XFloat::from_f64(z, prec)).to_f64();
    let (mut a, mut b) = (za, zb);
    let sb = match sign(b) {
        Ok(0) => return (b, b, b),
        Ok(s) => s,
        Err(_) => return (0.5 * (a + b), a, b),
    };
    // Bring infinite ends in first.
    if !a.is_finite() || !b.is_finite() {
        return (0.5 * (a + b), a, b);
    }
    let (mut fa, mut fb) = (val(a), val(b));
    let mut side = 0i8;
    for _ in 0..400 {
        if b - a <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        let mut m = if fa.is_finite() && fb.is_finite() && fa != fb {
            (a * fb - b * fa) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        if !(m > a && m < b) {
            m = 0.5 * (a + b);
        }
        // Alternate with plain bisection so that the bracket always halves.
        if side.abs() >= 2 {
            m = 0.5 * (a + b);
            side = 0;
        }
        match sign(m) {
            Ok(0) => return (m, m, m),
            Ok(s) if s == sb => {
                b = m;
                fb = val(m);
                side = if side < 0 { side - 1 } else { -1 };
                if side <= -2 {
                    fa *= 0.5;
                }
            }
            Ok(_) => {
                a = m;
                fa = val(m);
                side = if side > 0 { side + 1 } else { 1 };
                if side >= 2 {
                    fb *= 0.5;
                }
            }
            Err(_) => return (m, a, b),
        }
    }
    (0.5 * (a + b), a, b)
}

/// Turn an angle bracket with one root into a finite `z` bracket by moving
/// each infinite end outward in doubling steps until the count is still one.
/// Working in `z` rather than bisecting the angle matters for very large
/// roots: past `|z| ≈ 1e16` the angle can no longer separate them from `±∞`.
fn finite_bracket(chain: &SturmChain, s_lo: f64, s_hi: f64, prec: usize) -> Result<(f64, f64), RootError> {
    let end = |s: f64| match Param::Angle.point(s, prec) {
        Point::NegInf => f64::NEG_INFINITY,
        Point::PosInf => f64::INFINITY,
        Point::Finite(_) => s.tan(),
    };
    let count = |x: f64, y: f64| -> Result<usize, RootError> {
        Ok(chain.variations_at(&to_point(x, prec))?.saturating_sub(chain.variations_at(&to_point(y, prec))?))
    };
    let (mut a, mut b) = (end(s_lo), end(s_hi));
    if a == f64::NEG_INFINITY {
        let base = if b.is_finite() { b.min(0.0) } else { 0.0 };
        let mut step = 1.0f64;
        loop {
            let trial = base - step;
            if !trial.is_finite() {
                return Err(RootError::AmbiguousSign { prec });
            }
            if count(trial, b)? == 1 {
                a = trial;
                break;
            }
            step *= 2.0;
        }
    }
    if b == f64::INFINITY {
        let base = a.max(0.0);
        let mut step = 1.0f64;
        loop {
            let trial = base + step;
            if !trial.is_finite() {
                return Err(RootError::AmbiguousSign { prec });
            }
            if count(a, trial)? == 1 {
                b = trial;
                break;
            }
            step *= 2.0;
        }
    }
    Ok((a, b))
}

/// All distinct real roots in `(lo, hi]` (infinite ends allowed) with
/// multiplicities, each refined to `tol`. Repeated roots are handled by
/// isolating the squarefree part `p / gcd(p, p')`.
pub fn isolate_and_refine(p: &UniPoly, lo: f64, hi: f64, tol: f64) -> Result<Vec<RealRoot>, RootError> {
    match isolate_at(p, lo, hi, tol) {
        Err(RootError::AmbiguousSign { .. }) if p.prec() < PREC_HIGH => isolate_at(&p.with_prec(PREC_HIGH), lo, hi, tol),
        other => other,
    }
}

/// Like [`isolate_and_refine`] but at the polynomial's own precision, for
/// callers that rebuild their input at a higher precision themselves.
pub fn isolate_at(p: &UniPoly, lo: f64, hi: f64, tol: f64) -> Result<Vec<RealRoot>, RootError> {
    let prec = p.prec();
    let chain = SturmChain::new(p)?;
    let (sqf, gcds) = if chain.squarefree() {
        (p.clone(), Vec::new())
    } else {
        let g = chain.gcd().clone();
        let (q, _) = p.div_rem(&g);
        // Successive gcds for multiplicity counting.
        let mut gcds = vec![g.clone()];
        let mut cur = g;
        while cur.degree().unwrap_or(0) > 0 {
            let c = SturmChain::new(&cur)?;
            if c.squarefree() {
                break;
            }
            cur = c.gcd().clone();
            gcds.push(cur.clone());
        }
        (q, gcds)
    };
    let chain = if gcds.is_empty() { chain } else { SturmChain::new(&sqf)? };
    let infinite = !lo.is_finite() || !hi.is_finite();
    let param = if infinite { Param::Angle } else { Param::Linear };
    let (slo, shi) = if infinite {
        (
            if lo.is_finite() { lo.atan() } else { -FRAC_PI_2 },
            if hi.is_finite() { hi.atan() } else { FRAC_PI_2 },
        )
    } else {
        (lo, hi)
    };
    let brackets = isolate(&chain, param, slo, shi, prec)?;
    let mut out = Vec::with_capacity(brackets.len());
    for (a, b) in brackets {
        let (za, zb) = if infinite { finite_bracket(&chain, a, b, prec)? } else { (a, b) };
        let (v, ra, rb) = refine(&sqf, za, zb, tol);
        let mut multiplicity = 1;
        for g in &gcds {
            if g.degree().unwrap_or(0) == 0 {
                break;
            }
            let gv = g.eval(&XFloat::from_f64(v, prec)).to_f64().abs();
            if gv <= 1e-6 * g.magnitude_at(v) {
                multiplicity += 1;
            } else {
                break;
            }
        }
        out.push(RealRoot { value: v, multiplicity, lo: ra, hi: rb });
    }
    Ok(out)
}

/// Convenience: real roots of a polynomial given by `f64` coefficients.
pub fn real_roots_f64(coeffs: &[f64], lo: f64, hi: f64, tol: f64) -> Result<Vec<RealRoot>, RootError> {
    isolate_and_refine(&UniPoly::from_f64(coeffs, PREC_DEFAULT), lo, hi, tol)
}

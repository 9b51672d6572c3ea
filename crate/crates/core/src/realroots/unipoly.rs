//! Dense univariate polynomials over [`XFloat`] with per-coefficient
//! absolute error bounds.

use super::xfloat::{XComplex, XFloat};
use super::RootError;
use std::fmt;

/// `Σ coeffs[i] zⁱ`. `err[i]` bounds the absolute error already present in
/// `coeffs[i]` (zero for exactly known inputs).
#[derive(Clone)]
pub struct UniPoly {
    coeffs: Vec<XFloat>,
    err: Vec<f64>,
    prec: usize,
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter().map(|c| c.to_f64())).finish()
    }
}

/// Trimming threshold for leading coefficients, relative to the largest one.
const TRIM_REL: f64 = 1e-30;

impl UniPoly {
    pub fn new(coeffs: Vec<XFloat>, err: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), err.len());
        let prec = coeffs.first().map_or(super::PREC_DEFAULT, |c| c.prec());
        let mut p = UniPoly { coeffs, err, prec };
        p.trim();
        p
    }

    pub fn exact(coeffs: Vec<XFloat>) -> Self {
        let n = coeffs.len();
        UniPoly::new(coeffs, vec![0.0; n])
    }

    pub fn from_f64(c: &[f64], prec: usize) -> Self {
        UniPoly::exact(c.iter().map(|&v| XFloat::from_f64(v, prec)).collect())
    }

    pub fn zero(prec: usize) -> Self {
        UniPoly { coeffs: Vec::new(), err: Vec::new(), prec }
    }

    /// `Π (z - r)`.
    pub fn from_roots(roots: &[f64], prec: usize) -> Self {
        let mut c = vec![XFloat::one(prec)];
        for &r in roots {
            let r = XFloat::from_f64(r, prec);
            let mut next = vec![XFloat::zero(prec); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i + 1] = &next[i + 1] + ci;
                next[i] = &next[i] - &(ci * &r);
            }
            c = next;
        }
        UniPoly::exact(c)
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn with_prec(&self, prec: usize) -> Self {
        UniPoly {
            coeffs: self.coeffs.iter().map(|c| c.with_prec(prec)).collect(),
            err: self.err.clone(),
            prec,
        }
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[XFloat] {
        &self.coeffs
    }

    pub fn errors(&self) -> &[f64] {
        &self.err
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(XFloat::to_f64).collect()
    }

    pub fn lead(&self) -> Option<&XFloat> {
        self.coeffs.last()
    }

    fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Drop leading coefficients that are exactly zero, indistinguishable
    /// from zero within their error bound, or below `1e-30` of the largest.
    fn trim(&mut self) {
        let big = self.max_abs();
        while let Some(c) = self.coeffs.last() {
            let v = c.to_f64().abs();
            let e = *self.err.last().unwrap();
            if c.is_zero() || v <= e || v <= TRIM_REL * big {
                self.coeffs.pop();
                self.err.pop();
            } else {
                break;
            }
        }
    }

    pub fn eval(&self, z: &XFloat) -> XFloat {
        let mut acc = XFloat::zero(self.prec.max(z.prec()));
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * z) + c;
        }
        acc
    }

    pub fn eval_f64(&self, z: f64) -> f64 {
        self.eval(&XFloat::from_f64(z, self.prec)).to_f64()
    }

    pub fn eval_complex(&self, z: &XComplex) -> XComplex {
        let mut acc = XComplex::zero(self.prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(z);
            acc.re = &acc.re + c;
        }
        acc
    }

    /// Certified sign of `p(z)` for `|z| ≤ 1`: the Horner value together with
    /// the bound `Σ (errᵢ + 2(n+1)·u·|cᵢ|) |z|ⁱ` on its error.
    fn sign_small(&self, z: &XFloat) -> Result<i8, RootError> {
        let v = self.eval(z);
        let za = z.to_f64().abs();
        let u = XFloat::zero(self.prec).eps();
        let n = self.coeffs.len() as f64;
        let mut bound = 0.0;
        let mut pw = 1.0;
        for (c, e) in self.coeffs.iter().zip(&self.err) {
            bound += (e + 2.0 * (n + 1.0) * u * c.to_f64().abs()) * pw;
            pw *= za;
        }
        if v.to_f64().abs() > bound {
            Ok(v.signum())
        } else {
            Err(RootError::AmbiguousSign { prec: self.prec })
        }
    }

    /// Certified sign of `p(z)`; `|z| > 1` is handled through the reversed
    /// polynomial so that no intermediate grows like `|z|ⁿ`.
    pub fn sign_at(&self, z: &XFloat) -> Result<i8, RootError> {
        if self.is_zero() {
            return Ok(0);
        }
        if z.to_f64().abs() <= 1.0 {
            return self.sign_small(z);
        }
        let n = self.coeffs.len() - 1;
        let rev = UniPoly {
            coeffs: self.coeffs.iter().rev().cloned().collect(),
            err: self.err.iter().rev().cloned().collect(),
            prec: self.prec,
        };
        let inv = &XFloat::one(self.prec) / z;
        let s = rev.sign_small(&inv)?;
        Ok(if n % 2 == 1 && z.signum() < 0 { -s } else { s })
    }

    /// Sign as `z → +∞` (`toward_pos`) or `z → -∞`.
    pub fn sign_at_infinity(&self, toward_pos: bool) -> i8 {
        match self.lead() {
            None => 0,
            Some(l) => {
                let s = l.signum();
                if !toward_pos && self.coeffs.len() % 2 == 0 {
                    -s
                } else {
                    s
                }
            }
        }
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero(self.prec);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| c.mul_f64((i + 1) as f64))
            .collect();
        let err = self.err[1..].iter().enumerate().map(|(i, e)| e * (i + 1) as f64).collect();
        UniPoly::new(coeffs, err)
    }

    pub fn mul(&self, o: &UniPoly) -> UniPoly {
        if self.is_zero() || o.is_zero() {
            return UniPoly::zero(self.prec);
        }
        let n = self.coeffs.len() + o.coeffs.len() - 1;
        let mut c = vec![XFloat::zero(self.prec); n];
        let mut e = vec![0.0; n];
        for (i, (a, ea)) in self.coeffs.iter().zip(&self.err).enumerate() {
            let af = a.to_f64().abs();
            for (j, (b, eb)) in o.coeffs.iter().zip(&o.err).enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
                e[i + j] += ea * b.to_f64().abs() + eb * af + ea * eb;
            }
        }
        UniPoly::new(c, e)
    }

    /// Multiply by a scalar; the error bounds scale along.
    pub fn scale(&self, k: &XFloat) -> UniPoly {
        let kf = k.to_f64().abs();
        UniPoly::new(
            self.coeffs.iter().map(|c| c * k).collect(),
            self.err.iter().map(|e| e * kf).collect(),
        )
    }

    /// Scale so that the largest coefficient has magnitude about one.
    pub fn normalized(&self) -> UniPoly {
        let m = self.max_abs();
        if m == 0.0 || !m.is_finite() {
            return self.clone();
        }
        let k = XFloat::from_f64(1.0 / pow2_near(m), self.prec);
        self.scale(&k)
    }

    /// Polynomial long division `self = q·d + r`, with first-order error
    /// propagation into `r`.
    pub fn div_rem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        let dn = d.degree().expect("division by the zero polynomial");
        let Some(n) = self.degree() else {
            return (UniPoly::zero(self.prec), UniPoly::zero(self.prec));
        };
        if n < dn {
            return (UniPoly::zero(self.prec), self.clone());
        }
        let u = XFloat::zero(self.prec).eps();
        let mut r = self.coeffs.clone();
        let mut re = self.err.clone();
        let mut q = vec![XFloat::zero(self.prec); n - dn + 1];
        let lead = d.lead().unwrap();
        for k in (0..=n - dn).rev() {
            let qk = &r[k + dn] / lead;
            let qf = qk.to_f64().abs();
            for j in 0..=dn {
                let prod = &qk * &d.coeffs[j];
                let idx = k + j;
                let before = r[idx].to_f64().abs();
                r[idx] = &r[idx] - &prod;
                // Propagated input errors plus rounding of this update.
                re[idx] += qf * d.err[j] + 2.0 * u * (before + prod.to_f64().abs());
            }
            q[k] = qk;
        }
        r.truncate(dn);
        re.truncate(dn);
        let qerr = vec![0.0; q.len()];
        (UniPoly::new(q, qerr), UniPoly::new(r, re))
    }

    /// Synthetic division by `(z - root)`; returns the quotient and the
    /// remainder `p(root)`.
    pub fn deflate(&self, root: &XFloat) -> (UniPoly, XFloat) {
        let n = self.coeffs.len();
        if n == 0 {
            return (UniPoly::zero(self.prec), XFloat::zero(self.prec));
        }
        let ra = root.to_f64().abs();
        let mut q = vec![XFloat::zero(self.prec); n - 1];
        let mut qe = vec![0.0; n - 1];
        let mut carry = self.coeffs[n - 1].clone();
        let mut carry_err = self.err[n - 1];
        for k in (0..n - 1).rev() {
            q[k] = carry.clone();
            qe[k] = carry_err;
            carry = &self.coeffs[k] + &(&carry * root);
            carry_err = self.err[k] + ra * carry_err;
        }
        (UniPoly::new(q, qe), carry)
    }

    /// `Σ |cᵢ| |z|ⁱ`, the natural scale for judging `|p(z)|`.
    pub fn magnitude_at(&self, z: f64) -> f64 {
        let za = z.abs();
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * za + c.to_f64().abs();
        }
        acc
    }
}

fn pow2_near(m: f64) -> f64 {
    2f64.powi(m.log2().round() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_roots_and_eval() {
        let p = UniPoly::from_roots(&[1.0, 2.0, 3.0], 128);
        assert_eq!(p.degree(), Some(3));
        assert_eq!(p.coeffs_f64(), vec![-6.0, 11.0, -6.0, 1.0]);
        assert_eq!(p.eval_f64(2.0), 0.0);
        assert_eq!(p.eval_f64(4.0), 6.0);
    }

    #[test]
    fn division_identity() {
        let p = UniPoly::from_f64(&[1.0, -2.0, 0.5, 3.0, 1.0], 128);
        let d = UniPoly::from_f64(&[2.0, 1.0, 1.0], 128);
        let (q, r) = p.div_rem(&d);
        for &z in &[-1.3, 0.2, 2.7] {
            let lhs = p.eval_f64(z);
            let rhs = q.eval_f64(z) * d.eval_f64(z) + r.eval_f64(z);
            assert!((lhs - rhs).abs() < 1e-13);
        }
        assert!(r.degree().unwrap() < 2);
    }

    #[test]
    fn signs_far_out_and_at_infinity() {
        let p = UniPoly::from_roots(&[1.0, 2.0, 3.0], 128);
        let big = XFloat::from_f64(1e12, 128);
        assert_eq!(p.sign_at(&big).unwrap(), 1);
        assert_eq!(p.sign_at(&-big).unwrap(), -1);
        assert_eq!(p.sign_at_infinity(true), 1);
        assert_eq!(p.sign_at_infinity(false), -1);
        assert!(p.sign_at(&XFloat::from_f64(2.0, 128)).is_err());
    }

    #[test]
    fn deflation_removes_a_root() {
        let p = UniPoly::from_roots(&[0.5, -1.0, 4.0], 128);
        let (q, rem) = p.deflate(&XFloat::from_f64(4.0, 128));
        assert!(rem.is_zero());
        assert_eq!(q.coeffs_f64(), UniPoly::from_roots(&[0.5, -1.0], 128).coeffs_f64());
    }
}

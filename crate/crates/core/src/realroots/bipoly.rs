//! Dense bivariate polynomials `Σ c[i][j] z1^i z2^j`.

use super::unipoly::UniPoly;
use super::xfloat::{XComplex, XFloat};

#[derive(Clone, Debug)]
pub struct BiPoly {
    /// `coeffs[i][j]` multiplies `z1^i z2^j`; every row has the same length.
    coeffs: Vec<Vec<XFloat>>,
    prec: usize,
}

impl BiPoly {
    /// Build from a ragged `f64` table; rows are padded with zeros.
    pub fn from_f64(table: &[Vec<f64>], prec: usize) -> Self {
        let width = table.iter().map(Vec::len).max().unwrap_or(0);
        let coeffs = table
            .iter()
            .map(|row| (0..width).map(|j| XFloat::from_f64(row.get(j).copied().unwrap_or(0.0), prec)).collect())
            .collect();
        let mut p = BiPoly { coeffs, prec };
        p.trim();
        p
    }

    pub fn from_xfloat(coeffs: Vec<Vec<XFloat>>, prec: usize) -> Self {
        let width = coeffs.iter().map(Vec::len).max().unwrap_or(0);
        let coeffs = coeffs
            .into_iter()
            .map(|mut row| {
                row.resize(width, XFloat::zero(prec));
                row
            })
            .collect();
        let mut p = BiPoly { coeffs, prec };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|r| r.iter().all(XFloat::is_zero)) {
            self.coeffs.pop();
        }
        loop {
            let w = self.coeffs.first().map_or(0, Vec::len);
            if w == 0 || !self.coeffs.iter().all(|r| r[w - 1].is_zero()) {
                break;
            }
            for r in &mut self.coeffs {
                r.pop();
            }
        }
        if self.coeffs.first().is_some_and(|r| r.is_empty()) {
            self.coeffs.clear();
        }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn with_prec(&self, prec: usize) -> BiPoly {
        let coeffs = self.coeffs.iter().map(|r| r.iter().map(|c| c.with_prec(prec)).collect()).collect();
        BiPoly { coeffs, prec }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: usize, j: usize) -> Option<&XFloat> {
        self.coeffs.get(i).and_then(|r| r.get(j))
    }

    /// Degree in `z1`.
    pub fn deg_z1(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Degree in `z2`.
    pub fn deg_z2(&self) -> usize {
        self.coeffs.first().map_or(0, |r| r.len().saturating_sub(1))
    }

    /// Total degree.
    pub fn total_degree(&self) -> usize {
        let mut d = 0;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    d = d.max(i + j);
                }
            }
        }
        d
    }

    /// Swap the roles of `z1` and `z2`.
    pub fn transposed(&self) -> BiPoly {
        let (n1, n2) = (self.coeffs.len(), self.deg_z2() + 1);
        if self.is_zero() {
            return self.clone();
        }
        let coeffs = (0..n2).map(|j| (0..n1).map(|i| self.coeffs[i][j].clone()).collect()).collect();
        BiPoly { coeffs, prec: self.prec }
    }

    pub fn eval(&self, z1: &XFloat, z2: &XFloat) -> XFloat {
        let mut acc = XFloat::zero(self.prec);
        for row in self.coeffs.iter().rev() {
            let mut inner = XFloat::zero(self.prec);
            for c in row.iter().rev() {
                inner = &(&inner * z2) + c;
            }
            acc = &(&acc * z1) + &inner;
        }
        acc
    }

    pub fn eval_f64(&self, z1: f64, z2: f64) -> f64 {
        self.eval(&XFloat::from_f64(z1, self.prec), &XFloat::from_f64(z2, self.prec)).to_f64()
    }

    /// `Σ |c_ij| |z1|^i |z2|^j`, the natural scale of a value at `(z1, z2)`.
    pub fn magnitude_at(&self, z1: f64, z2: f64) -> f64 {
        let mut acc = 0.0;
        for row in self.coeffs.iter().rev() {
            let mut inner = 0.0;
            for c in row.iter().rev() {
                inner = inner * z2.abs() + c.to_f64().abs();
            }
            acc = acc * z1.abs() + inner;
        }
        acc
    }

    /// Coefficients in `z2` (ascending) after substituting a complex `z1`.
    pub fn specialize_z1(&self, z1: &XComplex) -> Vec<XComplex> {
        let w = self.deg_z2() + 1;
        (0..w)
            .map(|j| {
                let mut acc = XComplex::zero(self.prec);
                for row in self.coeffs.iter().rev() {
                    acc = acc.mul(z1);
                    acc.re = &acc.re + &row[j];
                }
                acc
            })
            .collect()
    }

    /// The univariate polynomial in `z2` obtained by fixing a real `z1`.
    pub fn at_z1(&self, z1: &XFloat) -> UniPoly {
        let w = self.deg_z2() + 1;
        let c = (0..w)
            .map(|j| {
                let mut acc = XFloat::zero(self.prec);
                for row in self.coeffs.iter().rev() {
                    acc = &(&acc * z1) + &row[j];
                }
                acc
            })
            .collect();
        UniPoly::exact(c)
    }

    /// A polynomial in `z1` alone, coefficients ascending.
    pub fn in_z1(c: &[XFloat], prec: usize) -> BiPoly {
        BiPoly::from_xfloat(c.iter().map(|v| vec![v.clone()]).collect(), prec)
    }

    /// A polynomial in `z2` alone, coefficients ascending.
    pub fn in_z2(c: &[XFloat], prec: usize) -> BiPoly {
        BiPoly::from_xfloat(vec![c.to_vec()], prec)
    }

    pub fn add(&self, o: &BiPoly) -> BiPoly {
        let prec = self.prec.max(o.prec);
        let n1 = self.coeffs.len().max(o.coeffs.len());
        let n2 = (self.deg_z2() + 1).max(o.deg_z2() + 1);
        let get = |p: &BiPoly, i: usize, j: usize| p.coeff(i, j).cloned().unwrap_or_else(|| XFloat::zero(prec));
        let c = (0..n1).map(|i| (0..n2).map(|j| &get(self, i, j) + &get(o, i, j)).collect()).collect();
        BiPoly::from_xfloat(c, prec)
    }

    pub fn sub(&self, o: &BiPoly) -> BiPoly {
        self.add(&o.scale(&XFloat::from_f64(-1.0, o.prec)))
    }

    pub fn scale(&self, k: &XFloat) -> BiPoly {
        let c = self.coeffs.iter().map(|r| r.iter().map(|v| v * k).collect()).collect();
        BiPoly::from_xfloat(c, self.prec)
    }

    pub fn mul(&self, o: &BiPoly) -> BiPoly {
        let prec = self.prec.max(o.prec);
        if self.is_zero() || o.is_zero() {
            return BiPoly { coeffs: Vec::new(), prec };
        }
        let (a1, a2) = (self.coeffs.len(), self.deg_z2() + 1);
        let (b1, b2) = (o.coeffs.len(), o.deg_z2() + 1);
        let mut c = vec![vec![XFloat::zero(prec); a2 + b2 - 1]; a1 + b1 - 1];
        for (i, ra) in self.coeffs.iter().enumerate() {
            for (j, va) in ra.iter().enumerate() {
                if va.is_zero() {
                    continue;
                }
                for (k, rb) in o.coeffs.iter().enumerate() {
                    for (l, vb) in rb.iter().enumerate() {
                        if !vb.is_zero() {
                            c[i + k][j + l] = &c[i + k][j + l] + &(va * vb);
                        }
                    }
                }
            }
        }
        BiPoly::from_xfloat(c, prec)
    }

    pub fn pow(&self, n: u32) -> BiPoly {
        let mut acc = BiPoly::from_xfloat(vec![vec![XFloat::one(self.prec)]], self.prec);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivatives `(∂/∂z1, ∂/∂z2)`.
    pub fn gradient(&self) -> (BiPoly, BiPoly) {
        let p = self.prec;
        let d1 = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, row)| row.iter().map(|c| c.mul_f64(i as f64)).collect())
            .collect();
        let d2 = self
            .coeffs
            .iter()
            .map(|row| row.iter().enumerate().skip(1).map(|(j, c)| c.mul_f64(j as f64)).collect())
            .collect();
        (BiPoly::from_xfloat(d1, p), BiPoly::from_xfloat(d2, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_matches_direct_sum() {
        let p = BiPoly::from_f64(&[vec![1.0, 2.0], vec![0.0, 0.0, 3.0], vec![-1.0]], 128);
        let (x, y) = (0.7, -1.3);
        let direct = 1.0 + 2.0 * y + 3.0 * x * y * y - x * x;
        assert!((p.eval_f64(x, y) - direct).abs() < 1e-14);
        assert_eq!(p.deg_z1(), 2);
        assert_eq!(p.deg_z2(), 2);
        assert_eq!(p.total_degree(), 3);
        let t = p.transposed();
        assert!((t.eval_f64(y, x) - direct).abs() < 1e-14);
    }

    #[test]
    fn arithmetic_matches_pointwise() {
        let p = BiPoly::from_f64(&[vec![1.0, -2.0], vec![0.5]], 128);
        let q = BiPoly::from_f64(&[vec![0.0, 0.0, 3.0], vec![1.0, 1.0]], 128);
        let (x, y) = (0.3, -0.7);
        let (pv, qv) = (p.eval_f64(x, y), q.eval_f64(x, y));
        assert!((p.mul(&q).eval_f64(x, y) - pv * qv).abs() < 1e-14);
        assert!((p.add(&q).eval_f64(x, y) - (pv + qv)).abs() < 1e-14);
        assert!((p.sub(&q).eval_f64(x, y) - (pv - qv)).abs() < 1e-14);
        assert!((q.pow(3).eval_f64(x, y) - qv.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn gradient_is_consistent() {
        let p = BiPoly::from_f64(&[vec![0.0, 1.0, 1.0], vec![2.0, 0.0, -1.0]], 128);
        let (gx, gy) = p.gradient();
        let (x, y, h) = (0.3, 0.9, 1e-6);
        let fx = (p.eval_f64(x + h, y) - p.eval_f64(x - h, y)) / (2.0 * h);
        let fy = (p.eval_f64(x, y + h) - p.eval_f64(x, y - h)) / (2.0 * h);
        assert!((gx.eval_f64(x, y) - fx).abs() < 1e-8);
        assert!((gy.eval_f64(x, y) - fy).abs() < 1e-8);
    }
}

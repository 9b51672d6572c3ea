//! Resultants of bivariate polynomials by evaluation and interpolation.
//!
//! The resultant in the surviving variable is a polynomial of degree at most
//! `deg_1(f) deg_2(g) + deg_2(f) deg_1(g)`. It is sampled at roots of unity,
//! each sample being the determinant of a complex Sylvester matrix computed
//! by elimination with partial pivoting, and the coefficients are recovered
//! by an inverse DFT. Real inputs give conjugate-symmetric samples, so only
//! the upper half circle is evaluated.

use super::bipoly::BiPoly;
use super::unipoly::UniPoly;
use super::xfloat::{XComplex, XFloat};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eliminate {
    Z1,
    Z2,
}

/// `Res(f, g)` with respect to the eliminated variable, as a polynomial in
/// the other one, at the inputs' precision.
///
/// The whole computation is repeated 64 bits higher; the difference of the
/// two coefficient vectors (plus a few ulps of the largest coefficient) is
/// recorded as the coefficient error bound. Worst-case a priori bounds such
/// as Hadamard's overestimate the error by tens of orders of magnitude here
/// and would cut Sturm chains short.
pub fn resultant(f: &BiPoly, g: &BiPoly, eliminate: Eliminate) -> UniPoly {
    let (f, g) = match eliminate {
        Eliminate::Z2 => (f.clone(), g.clone()),
        Eliminate::Z1 => (f.transposed(), g.transposed()),
    };
    let prec = f.prec().max(g.prec());
    if f.is_zero() || g.is_zero() {
        return UniPoly::zero(prec);
    }
    if f.deg_z2() == 0 && g.deg_z2() == 0 {
        // Both constant in the eliminated variable: the empty Sylvester
        // matrix has determinant one.
        return UniPoly::exact(vec![XFloat::one(prec)]);
    }
    let lo = interpolate(&f, &g, prec);
    let hi = interpolate(&f.with_prec(prec + 64), &g.with_prec(prec + 64), prec + 64);
    let big = hi.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max);
    let ulp = XFloat::one(prec).eps();
    let errs = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| 2.0 * (a - b).abs().to_f64() + 8.0 * ulp * big)
        .collect();
    UniPoly::new(hi.into_iter().map(|c| c.with_prec(prec)).collect(), errs)
}

/// Coefficients of the resultant in `z1` (eliminating `z2`) at `prec` bits.
fn interpolate(f: &BiPoly, g: &BiPoly, prec: usize) -> Vec<XFloat> {
    let (m, n) = (f.deg_z2(), g.deg_z2());
    let bound = f.deg_z1() * n + m * g.deg_z1();
    let npts = bound + 1;
    let mut samples: Vec<XComplex> = vec![XComplex::zero(prec); npts];
    for k in 0..=npts / 2 {
        let w = root_of_unity(k, npts, prec);
        let fc = f.specialize_z1(&w);
        let gc = g.specialize_z1(&w);
        let det = determinant(sylvester(&fc, &gc, m, n, prec));
        if k > 0 && npts - k != k {
            samples[npts - k] = det.conj();
        }
        samples[k] = det;
    }
    // Inverse DFT: c_j = (1/N) Σ_k s_k ω^{-jk}.
    let inv_n = XFloat::one(prec) / XFloat::from_f64(npts as f64, prec);
    let roots: Vec<XComplex> = (0..npts).map(|k| root_of_unity(k, npts, prec)).collect();
    (0..npts)
        .map(|j| {
            let mut acc = XFloat::zero(prec);
            for (k, s) in samples.iter().enumerate() {
                let w = &roots[(npts - (j * k) % npts) % npts];
                acc = &acc + &s.mul(w).re;
            }
            &acc * &inv_n
        })
        .collect()
}

fn root_of_unity(k: usize, n: usize, prec: usize) -> XComplex {
    let (c, s) = XFloat::turn_cos_sin(k, n, prec);
    XComplex::new(c, s)
}

/// Sylvester matrix of `f = Σ f_j y^j` (degree `m`) and `g` (degree `n`),
/// rows holding coefficients from the highest power down.
fn sylvester(f: &[XComplex], g: &[XComplex], m: usize, n: usize, prec: usize) -> Vec<Vec<XComplex>> {
    let size = m + n;
    let mut mat = vec![vec![XComplex::zero(prec); size]; size];
    for r in 0..n {
        for j in 0..=m {
            mat[r][r + (m - j)] = f[j].clone();
        }
    }
    for r in 0..m {
        for j in 0..=n {
            mat[n + r][r + (n - j)] = g[j].clone();
        }
    }
    mat
}

fn determinant(mut a: Vec<Vec<XComplex>>) -> XComplex {
    let n = a.len();
    let prec = a.first().and_then(|r| r.first()).map_or(128, |c| c.re.prec());
    let mut det = XComplex::one(prec);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm1().total_cmp(&a[j][col].norm1()))
            .unwrap();
        if a[piv][col].is_zero() {
            return XComplex::zero(prec);
        }
        if piv != col {
            a.swap(piv, col);
            det = det.neg();
        }
        let p = a[col][col].clone();
        det = det.mul(&p);
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].div(&p);
            for c in col + 1..n {
                let t = factor.mul(&a[col][c]);
                a[r][c] = a[r][c].sub(&t);
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(p: &UniPoly, want: &[f64]) -> bool {
        let got = p.coeffs_f64();
        got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-25)
    }

    #[test]
    fn linear_pair() {
        // f = z2 - z1, g = z2 + z1.
        let f = BiPoly::from_f64(&[vec![0.0, 1.0], vec![-1.0]], 128);
        let g = BiPoly::from_f64(&[vec![0.0, 1.0], vec![1.0]], 128);
        let r = resultant(&f, &g, Eliminate::Z2);
        assert!(close(&r, &[0.0, 2.0]) || close(&r, &[0.0, -2.0]), "{r:?}");
    }

    #[test]
    fn parabola_and_line() {
        // f = z2 - z1², g = z2 - 1.
        let f = BiPoly::from_f64(&[vec![0.0, 1.0], vec![0.0], vec![-1.0]], 128);
        let g = BiPoly::from_f64(&[vec![-1.0, 1.0]], 128);
        let r = resultant(&f, &g, Eliminate::Z2);
        assert!(close(&r, &[1.0, 0.0, -1.0]) || close(&r, &[-1.0, 0.0, 1.0]), "{r:?}");
    }

    #[test]
    fn eliminating_z1_mirrors_z2() {
        let f = BiPoly::from_f64(&[vec![0.0, 1.0], vec![0.0], vec![-1.0]], 128);
        let g = BiPoly::from_f64(&[vec![-1.0, 1.0]], 128);
        let r = resultant(&f.transposed(), &g.transposed(), Eliminate::Z1);
        assert_eq!(r.degree(), Some(2));
        assert!(r.eval_f64(1.0).abs() < 1e-25);
        assert!(r.eval_f64(-1.0).abs() < 1e-25);
    }

    #[test]
    fn planted_common_root_projects() {
        let (x, y) = (0.375, -1.25);
        // f = (z1 - x)(z2 + 2) + (z2 - y)(z1² + 1); g = (z2 - y)^3 + (z1 - x) z2.
        let f = BiPoly::from_f64(
            &[vec![-2.0 * x - y, 1.0 - x], vec![2.0, 1.0], vec![-y, 1.0]],
            128,
        );
        let g = BiPoly::from_f64(
            &[vec![-y * y * y, 3.0 * y * y - x, -3.0 * y, 1.0], vec![0.0, 1.0]],
            128,
        );
        assert!(f.eval_f64(x, y) == 0.0 && g.eval_f64(x, y) == 0.0);
        let r = resultant(&f, &g, Eliminate::Z2);
        let scale = r.magnitude_at(x);
        assert!(r.eval_f64(x).abs() < 1e-25 * scale, "{}", r.eval_f64(x));
    }
}

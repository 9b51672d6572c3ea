//! A thin value type over `astro_float::BigFloat` with operator overloads.
//!
//! Every result is rounded to nearest at the larger of the operand
//! precisions, so a computation started from inputs at `p` bits stays at
//! `p` bits throughout.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

const RM: RoundingMode = RoundingMode::ToEven;

/// Default working precision (significand bits).
pub const PREC_DEFAULT: usize = 128;
/// Precision after one escalation.
pub const PREC_HIGH: usize = 256;

#[derive(Clone)]
pub struct XFloat(BigFloat);

impl XFloat {
    pub fn from_f64(v: f64, prec: usize) -> Self {
        if v == 0.0 {
            // `BigFloat::from_f64(0.0, p)` yields a zero with no mantissa.
            return XFloat::zero(prec);
        }
        XFloat(BigFloat::from_f64(v, prec))
    }

    pub fn zero(prec: usize) -> Self {
        XFloat(BigFloat::new(prec))
    }

    pub fn one(prec: usize) -> Self {
        XFloat::from_f64(1.0, prec)
    }

    pub fn prec(&self) -> usize {
        match self.0.mantissa_max_bit_len() {
            Some(p) if p > 0 => p,
            _ => PREC_DEFAULT,
        }
    }

    /// Unit roundoff at this precision, as an `f64`.
    pub fn eps(&self) -> f64 {
        (2.0f64).powi(1 - self.prec() as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.0.is_nan() || self.0.is_inf())
    }

    pub fn signum(&self) -> i8 {
        if self.0.is_zero() {
            0
        } else if self.0.is_negative() {
            -1
        } else {
            1
        }
    }

    pub fn abs(&self) -> Self {
        XFloat(self.0.abs())
    }

    pub fn sqrt(&self) -> Self {
        XFloat(self.0.sqrt(self.prec(), RM))
    }

    /// Nearest-ish `f64` (truncated to the top 64 significand bits, then
    /// rounded). Values outside the `f64` range saturate to ±∞ or 0.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        if self.0.is_inf() {
            return if self.0.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        let Some((words, _bits, sign, exp, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        let Some(&top) = words.last() else { return 0.0 };
        if top == 0 {
            return 0.0;
        }
        let mag = top as f64 * pow2(exp as i64 - 64);
        if sign == Sign::Neg {
            -mag
        } else {
            mag
        }
    }

    /// `log2 |x|` rounded down (binary exponent), `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            self.0.exponent().map(|e| e as i64)
        }
    }

    pub fn with_prec(&self, prec: usize) -> Self {
        let mut v = self.0.clone();
        let _ = v.set_precision(prec, RM);
        XFloat(v)
    }

    pub fn mul_f64(&self, k: f64) -> Self {
        self * &XFloat::from_f64(k, self.prec())
    }

    pub fn max_abs<'a>(a: &'a XFloat, b: &'a XFloat) -> &'a XFloat {
        if a.abs_cmp(b) == Ordering::Less {
            b
        } else {
            a
        }
    }

    pub fn abs_cmp(&self, other: &XFloat) -> Ordering {
        // `BigFloat::abs_cmp` compares signed values in 0.9, so compare the
        // absolute values explicitly.
        match self.0.abs().cmp(&other.0.abs()) {
            Some(v) if v < 0 => Ordering::Less,
            Some(v) if v > 0 => Ordering::Greater,
            _ => Ordering::Equal,
        }
    }
}

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

impl XFloat {
    /// `(cos, sin)` of `2πk/n` at `prec` bits.
    pub fn turn_cos_sin(k: usize, n: usize, prec: usize) -> (XFloat, XFloat) {
        let wp = prec + 32;
        CONSTS.with(|cc| {
            let mut cc = cc.borrow_mut();
            let pi = cc.pi(wp, RM);
            let th = pi
                .mul(&BigFloat::from_u64(2 * k as u64, wp), wp, RM)
                .div(&BigFloat::from_u64(n as u64, wp), wp, RM);
            let c = th.cos(wp, RM, &mut cc);
            let s = th.sin(wp, RM, &mut cc);
            (XFloat(c).with_prec(prec), XFloat(s).with_prec(prec))
        })
    }

    /// `π` at `prec` bits.
    pub fn pi(prec: usize) -> XFloat {
        CONSTS.with(|cc| XFloat(cc.borrow_mut().pi(prec, RM)))
    }

    /// `e^x` at this value's precision.
    pub fn exp(&self) -> XFloat {
        let p = self.prec();
        CONSTS.with(|cc| XFloat(self.0.exp(p, RM, &mut cc.borrow_mut())))
    }
}

fn pow2(e: i64) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e < -1074 {
        0.0
    } else if e < -1022 {
        // Split to stay in range through the subnormals.
        2f64.powi(-1022) * 2f64.powi((e + 1022) as i32)
    } else {
        2f64.powi(e as i32)
    }
}

impl PartialEq for XFloat {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for XFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|v| v.cmp(&0))
    }
}

impl fmt::Debug for XFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

impl fmt::Display for XFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&XFloat> for &XFloat {
            type Output = XFloat;
            fn $m(self, rhs: &XFloat) -> XFloat {
                let p = self.prec().max(rhs.prec());
                XFloat(self.0.$m(&rhs.0, p, RM))
            }
        }
        impl $tr<XFloat> for XFloat {
            type Output = XFloat;
            fn $m(self, rhs: XFloat) -> XFloat {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&XFloat> for XFloat {
            type Output = XFloat;
            fn $m(self, rhs: &XFloat) -> XFloat {
                (&self).$m(rhs)
            }
        }
        impl $tr<XFloat> for &XFloat {
            type Output = XFloat;
            fn $m(self, rhs: XFloat) -> XFloat {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for XFloat {
    type Output = XFloat;
    fn neg(self) -> XFloat {
        XFloat(self.0.neg())
    }
}

impl Neg for &XFloat {
    type Output = XFloat;
    fn neg(self) -> XFloat {
        XFloat(-(self.0.clone()))
    }
}

/// Complex number over [`XFloat`], just enough for evaluating determinants
/// on the unit circle.
#[derive(Clone, Debug)]
pub struct XComplex {
    pub re: XFloat,
    pub im: XFloat,
}

impl XComplex {
    pub fn new(re: XFloat, im: XFloat) -> Self {
        XComplex { re, im }
    }

    pub fn real(re: XFloat) -> Self {
        let p = re.prec();
        XComplex { re, im: XFloat::zero(p) }
    }

    pub fn zero(prec: usize) -> Self {
        XComplex { re: XFloat::zero(prec), im: XFloat::zero(prec) }
    }

    pub fn one(prec: usize) -> Self {
        XComplex::real(XFloat::one(prec))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &XComplex) -> XComplex {
        XComplex { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &XComplex) -> XComplex {
        XComplex { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn mul(&self, o: &XComplex) -> XComplex {
        XComplex {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn scale(&self, k: &XFloat) -> XComplex {
        XComplex { re: &self.re * k, im: &self.im * k }
    }

    pub fn div(&self, o: &XComplex) -> XComplex {
        let den = &o.re * &o.re + &o.im * &o.im;
        let re = (&self.re * &o.re + &self.im * &o.im) / &den;
        let im = (&self.im * &o.re - &self.re * &o.im) / &den;
        XComplex { re, im }
    }

    pub fn neg(&self) -> XComplex {
        XComplex { re: -&self.re, im: -&self.im }
    }

    pub fn conj(&self) -> XComplex {
        XComplex { re: self.re.clone(), im: -&self.im }
    }

    /// `|re| + |im|`, a cheap magnitude for pivot selection.
    pub fn norm1(&self) -> f64 {
        self.re.to_f64().abs() + self.im.to_f64().abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_arithmetic() {
        for &v in &[1.0, -2.5, 3.0e-200, 7.25e250, 0.1] {
            assert_eq!(XFloat::from_f64(v, 128).to_f64(), v);
        }
        let a = XFloat::from_f64(1.0, 128);
        let b = XFloat::from_f64(3.0, 128);
        let third = &a / &b;
        let back = &third * &b;
        assert!((back - a).abs().to_f64() < 1e-37);
        assert_eq!(XFloat::from_f64(2.0, 128).sqrt().to_f64(), 2f64.sqrt());
        let (c, s) = XFloat::turn_cos_sin(1, 8, 128);
        let unit = &(&c * &c) + &(&s * &s) - XFloat::one(128);
        assert!(unit.abs().to_f64() < 1e-37);
        assert!((c - s).abs().to_f64() < 1e-37);
    }

    #[test]
    fn precision_is_kept() {
        let a = XFloat::from_f64(1.0, 256);
        let b = XFloat::from_f64(1e-70, 256);
        let s = &a + &b;
        assert!((s - a).to_f64() > 0.0);
        assert_eq!(XFloat::from_f64(1.0, 128).prec(), 128);
    }

    #[test]
    fn ordering_and_sign() {
        let a = XFloat::from_f64(-1.5, 128);
        let b = XFloat::from_f64(0.25, 128);
        assert!(a < b);
        assert_eq!(a.signum(), -1);
        assert_eq!(XFloat::zero(128).signum(), 0);
        assert_eq!(a.abs_cmp(&b), Ordering::Greater);
    }
}

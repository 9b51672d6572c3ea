//! Random draws shared by the integration suites.
#![allow(dead_code)]

use abelcycles::curves::{common_zero_discriminant, CurveParams};
use abelcycles::flow::AbelEq;
use rand::Rng;

pub fn coeffs<R: Rng>(rng: &mut R, range: f64) -> ([f64; 3], [f64; 3]) {
    let mut c = || rng.gen_range(-range..range);
    ([c(), c(), c()], [c(), c(), c()])
}

/// Raw equation with coefficients uniform in `[-range, range]`.
pub fn equation<R: Rng>(rng: &mut R, range: f64) -> AbelEq {
    let (a, b) = coeffs(rng, range);
    AbelEq::from_coeffs(a, b)
}

/// Generic curve parameters: `b` changes sign, `|a0| > 1e-3` and the
/// common-zero discriminant exceeds `1e-6`.
pub fn generic_params<R: Rng>(rng: &mut R, range: f64) -> (AbelEq, CurveParams) {
    loop {
        let eq = equation(rng, range);
        let Ok(p) = CurveParams::from_eq(&eq) else { continue };
        if p.a0.abs() > 1e-3 && common_zero_discriminant(p.r1, p.r2, p.b0).abs() > 1e-6 {
            return (eq, p);
        }
    }
}

//! The brute-force oracle against the return-map pipeline.

mod common;

use abelcycles::flow::{AbelEq, Tolerances};
use abelcycles::oracle::{brute_count, brute_half_map, cos_family, OracleConfig};
use abelcycles::poincare::{find_cycles, half_map, SearchConfig, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

#[test]
fn closed_form_constant_sign_cycles() {
    let eq = AbelEq::from_coeffs([-1.0, 0.0, 0.0], [2.0, 1.0, 0.0]);
    let r = brute_count(&eq, None, &OracleConfig::default()).unwrap();
    assert_eq!(r.count(), 2);
    assert!(!r.suspected_continuum());
    // Periodic solutions: x = 2 + (cos t + sin t)/2 for x > 0 and
    // x = -2 + (sin t - cos t)/2 for x < 0.
    let mut roots = r.roots.clone();
    roots.sort_by(f64::total_cmp);
    assert!((roots[0] + 2.5).abs() < 1e-6, "{roots:?}");
    assert!((roots[1] - 2.5).abs() < 1e-6, "{roots:?}");
}

#[test]
fn sine_coefficients_are_a_continuum() {
    let eq = AbelEq::from_coeffs([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]);
    let r = brute_count(&eq, None, &OracleConfig::default()).unwrap();
    assert!(r.suspected_continuum());
}

#[test]
fn cos_family_has_two_cycles_at_small_eps() {
    let r = brute_count(&cos_family(0.05, 4.0), None, &OracleConfig::default()).unwrap();
    assert!(r.count() >= 2, "{r:?}");
}

#[test]
fn half_map_special_values() {
    let center = AbelEq::normalized(abelcycles::trigpoly::TrigPoly::new(0.0, 0.0, 1.0), 0.0);
    let t2 = brute_half_map(&center, FRAC_PI_2, Side::Plus).unwrap();
    assert!((t2 - 3.0 * FRAC_PI_2).abs() < 1e-10);
    let flat = AbelEq::normalized(abelcycles::trigpoly::TrigPoly::new(0.0, 0.0, 0.0), 0.0);
    let t2 = brute_half_map(&flat, FRAC_PI_4, Side::Plus).unwrap();
    assert!((t2 - (TAU - FRAC_PI_4)).abs() < 1e-10);
}

#[test]
fn half_maps_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let tol = Tolerances::new(1e-12, 1e-14);
    let (mut compared, mut worst) = (0, 0.0f64);
    while compared < 100 {
        let (_, p) = common::generic_params(&mut rng, 3.0);
        let eq = p.equation();
        let tbar = eq.tbar().unwrap();
        let t1 = rng.gen_range(0.02..0.98) * tbar;
        let side = if rng.gen_bool(0.5) { Side::Plus } else { Side::Minus };
        let (Some(x), Some(y)) = (half_map(&eq, t1, side, &tol).unwrap(), brute_half_map(&eq, t1, side)) else {
            continue;
        };
        assert!(x > tbar && x < TAU + 1e-12, "t2 = {x} outside (t̄, 2π)");
        worst = worst.max((x - y).abs());
        compared += 1;
    }
    assert!(worst < 1e-8, "worst half-map gap {worst:e}");
}

#[test]
fn counts_agree_on_random_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let cfg = OracleConfig::default();
    let search = SearchConfig::default();
    for _ in 0..40 {
        let (eq, _) = common::generic_params(&mut rng, 3.0);
        let fast = find_cycles(&eq, &search).unwrap();
        let slow = brute_count(&eq, None, &cfg).unwrap();
        assert!(!slow.suspected_continuum(), "{eq:?}");
        assert_eq!(fast.cycles.len(), slow.count(), "{eq:?}: {:?} vs {:?}", fast.cycles, slow.roots);
        let mut a: Vec<f64> = fast.cycles.iter().map(|c| c.x0).collect();
        a.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&slow.roots) {
            assert!((x - y).abs() <= 1e-6 * (1.0 + x.abs()), "{eq:?}: {x} vs {y}");
        }
    }
}

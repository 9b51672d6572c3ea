mod common;

use abelcycles::curves::*;
use abelcycles::oracle::gauss_composite;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

#[test]
fn h_matches_its_integral_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1000 {
        let eq = common::equation(&mut rng, 3.0);
        let (t, x) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
        let a = |s: f64| eq.a.eval(s);
        let quad = gauss_composite(a, t, x, 16) + gauss_composite(a, t + TAU, x, 16);
        let h = h_eval(&eq, t, x);
        assert!((h - quad).abs() < 1e-10 * (1.0 + h.abs()), "{h} vs {quad}");
    }
}

#[test]
fn harmonic_expansion_of_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..100 {
        let (eq, p) = common::generic_params(&mut rng, 3.0);
        let neq = p.equation();
        let (t, x) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
        let direct = 2.0 * m_eval(&neq, t, x) / p.a0;
        let scale = 2.0 * (p.abar(t) * p.b(x)).abs() + 2.0 * (p.abar(x) * p.b(t) * p.c).abs();
        assert!((m_harmonic(&p, t, x) - direct).abs() <= 1e-9 * scale.max(1e-300), "{p:?}");
        // The raw equation is only a rescaling in x and a shift in t.
        assert!(m_eval(&eq, t, t).is_finite());
    }
}

#[test]
fn k_derivative_is_minus_n_over_b_squared() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut checked = 0;
    while checked < 100 {
        let (_, p) = common::generic_params(&mut rng, 3.0);
        let eq = p.equation();
        if p.b(1.0).abs() < 1e-2 {
            continue;
        }
        let h = 1e-5;
        let fd = (k_eval(&eq, 1.0 + h).unwrap() - k_eval(&eq, 1.0 - h).unwrap()) / (2.0 * h);
        let want = -n_eval(&eq, 1.0).unwrap() / p.b(1.0).powi(2);
        assert!((fd - want).abs() < 1e-6 * (1.0 + want.abs()), "{fd} vs {want} for {p:?}");
        checked += 1;
    }
}

#[test]
fn rational_model_reproduces_m_and_tangency() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..100 {
        let (eq, p) = common::generic_params(&mut rng, 3.0);
        let model = rational_model(&eq).unwrap();
        assert_eq!(model.f.total_degree(), 3);
        assert!(model.g.total_degree() <= 9);
        let (z1, z2) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let (t, x) = (angle_of(z1), angle_of(z2));
        let m = p.mbar(t, x);
        let m_scale = (p.abar(t) * p.b(x)).abs() + (p.abar(x) * p.b(t) * p.c).abs();
        assert!((model.mbar_from_f(z1, z2) - m).abs() <= 1e-9 * m_scale);
        let g = p.tangency(t, x);
        let g_scale = (p.n(t) * p.b(x).powi(3)).abs() + (p.n(x) * p.b(t).powi(3) * p.c * p.c).abs();
        assert!((model.tangency_from_g(z1, z2) - g).abs() <= 1e-9 * g_scale);
    }
}

#[test]
fn h_branch_is_monotone_in_its_right_side() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..50 {
        let (_, p) = common::generic_params(&mut rng, 3.0);
        let mut pts: Vec<(f64, f64)> = (0..64)
            .map(|i| {
                let z1 = p.tbar() + TAU * (i as f64 + 0.5) / 64.0;
                let rhs = 2.0 * (p.r1 * (0.5 * z1).cos() + p.r2 * (0.5 * z1).sin());
                (rhs, h_zero_branch_params(&p, z1).unwrap())
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pts.windows(2) {
            if w[1].0 > w[0].0 + 1e-12 {
                assert!(w[1].1 < w[0].1, "{w:?}");
            }
        }
        for (t, x) in h_branch_samples(&p, 32) {
            assert!(p.hbar(t, x).abs() < 1e-9);
            assert!(x - t > 0.0 && x - t < TAU);
        }
    }
}

#[test]
fn component_count_is_resolution_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..20 {
        let (eq, _) = common::generic_params(&mut rng, 3.0);
        let coarse = count_components_m(&eq, 512).unwrap();
        let fine = count_components_m(&eq, 1024).unwrap();
        assert_eq!(coarse, fine, "{eq:?}");
    }
}

#[test]
fn tangency_points_solve_the_system_and_none_are_missed() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for _ in 0..20 {
        let (_, p) = common::generic_params(&mut rng, 3.0);
        let rep = solve_tangency_params(&p).unwrap();
        assert!(rep.count() <= 27);
        for q in &rep.points {
            assert!(q.m_residual < 1e-8 && q.minor_residual < 1e-6, "{q:?}");
            assert!(q.x - q.t > 0.0 && q.x - q.t < TAU);
        }
        let tb = p.tbar();
        for (t, x) in tangency_newton_grid(&p, 48) {
            let inside = x - t > 1e-6 && x - t < TAU - 1e-6 && t + x > tb + 1e-6 && t + x < tb + TAU - 1e-6;
            if inside && t > 1e-6 && x < TAU - 1e-6 {
                let found = rep.points.iter().chain(&rep.boundary).any(|q| (q.t - t).hypot(q.x - x) < 1e-6);
                assert!(found, "grid solution ({t}, {x}) missing for {p:?}");
            }
        }
    }
}

/// At `r1 = -1` the cubic part of the rational model vanishes and the
/// resultant picks up a root near `z1 = ±1e16`. This used to hang root
/// isolation.
#[test]
fn tangency_terminates_when_the_model_degenerates() {
    let eq = abelcycles::flow::AbelEq::from_coeffs([5.0 / 3.0, -5.0 / 3.0, -5.0 / 3.0], [-1.0, 1.0, 1.0]);
    let p = CurveParams::from_eq(&eq).unwrap();
    assert!((p.r1 + 1.0).abs() < 1e-12);
    let rep = solve_tangency_params(&p).unwrap();
    for q in &rep.points {
        assert!(q.m_residual < 1e-8, "{q:?}");
    }
    for (t, x) in tangency_newton_grid(&p, 48) {
        let found = rep.points.iter().chain(&rep.boundary).any(|q| (q.t - t).hypot(q.x - x) < 1e-6);
        let tb = p.tbar();
        let inside = x - t > 1e-6 && x - t < TAU - 1e-6 && t + x > tb + 1e-6 && t + x < tb + TAU - 1e-6;
        assert!(found || !inside, "grid solution ({t}, {x}) missing");
    }
}

#[test]
fn tangency_points_lie_on_the_exported_contour() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    for _ in 0..10 {
        let (_, p) = common::generic_params(&mut rng, 3.0);
        let rep = solve_tangency_params(&p).unwrap();
        let contour = contour_m(&p, 512, true).unwrap();
        for q in &rep.points {
            let d = contour.distance_to(q.t, q.x);
            assert!(d < 1e-6, "{q:?} is {d} from the contour");
        }
    }
}

#[test]
fn discriminant_detects_common_zeros() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut off = 0;
    while off < 500 {
        let (r1, r2, b0) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let disc = common_zero_discriminant(r1, r2, b0);
        if disc.abs() <= 1e-9 {
            continue;
        }
        // The gap is quadratic in the distance to a common zero.
        let gap = common_zero_gap(&CurveParams::new(1.0, r1, r2, b0));
        assert!(gap > 1e-12, "disc {disc} but gap {gap} at {r1} {r2} {b0}");
        off += 1;
    }
    for _ in 0..50 {
        let (r1, b0) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.2..3.0));
        let r2 = ((r1 + 1.0) * b0 * b0 - r1 + 1.0) / (2.0 * b0);
        assert!(common_zero_discriminant(r1, r2, b0).abs() < 1e-9);
        let gap = common_zero_gap(&CurveParams::new(1.0, r1, r2, b0));
        assert!(gap < 1e-10, "gap {gap} on the variety at {r1} {r2} {b0}");
    }
}

use abelcycles::realroots::{isolate_and_refine, resultant, sturm_count, BiPoly, Eliminate, RootError, UniPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn sturm_count_agrees_with_isolation_on_random_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 500 {
        let deg = rng.gen_range(1..=30);
        let c: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = UniPoly::from_f64(&c, 128);
        let (lo, hi) = (-3.0 + rng.gen_range(0.0..0.1), 3.0 - rng.gen_range(0.0..0.1));
        let count = match sturm_count(&p, lo, hi) {
            Ok(n) => n,
            Err(RootError::AmbiguousSign { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let roots = isolate_and_refine(&p, lo, hi, 1e-13).unwrap();
        assert_eq!(count, roots.len(), "degree {deg}: {c:?}");
        for w in roots.windows(2) {
            assert!(w[0].value < w[1].value);
        }
        checked += 1;
    }
}

#[test]
fn degree_27_planted_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let mut roots: Vec<f64> = (0..27).map(|_| rng.gen_range(-4.0..4.0)).collect();
        roots.sort_by(f64::total_cmp);
        let p = UniPoly::from_roots(&roots, 128);
        assert_eq!(sturm_count(&p, f64::NEG_INFINITY, f64::INFINITY).unwrap(), 27);
        let got = isolate_and_refine(&p, f64::NEG_INFINITY, f64::INFINITY, 1e-14).unwrap();
        assert_eq!(got.len(), 27);
        for (g, r) in got.iter().zip(&roots) {
            assert!((g.value - r).abs() < 1e-9, "{} vs {}", g.value, r);
        }
    }
}

#[test]
fn resultant_projects_planted_common_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        // Dyadic planted point so that the vanishing is exact in the inputs.
        let x = rng.gen_range(-64i32..64) as f64 / 32.0;
        let y = rng.gen_range(-64i32..64) as f64 / 32.0;
        let f = random_through(&mut rng, 3, 2, x, y);
        let g = random_through(&mut rng, 4, 5, x, y);
        let r = resultant(&f, &g, Eliminate::Z2);
        assert!(r.degree().unwrap() <= 3 * 5 + 2 * 4);
        let v = r.eval_f64(x).abs();
        assert!(v <= 1e-25 * r.magnitude_at(x), "{v}");
        let r1 = resultant(&f, &g, Eliminate::Z1);
        assert!(r1.eval_f64(y).abs() <= 1e-25 * r1.magnitude_at(y));
    }
}

/// Random bipoly of the given partial degrees with small dyadic
/// coefficients, shifted so that it vanishes at `(x, y)`.
fn random_through(rng: &mut ChaCha8Rng, d1: usize, d2: usize, x: f64, y: f64) -> BiPoly {
    let mut t: Vec<Vec<f64>> =
        (0..=d1).map(|_| (0..=d2).map(|_| rng.gen_range(-8i32..8) as f64 / 4.0).collect()).collect();
    let p = BiPoly::from_f64(&t, 256);
    t[0][0] -= p.eval_f64(x, y);
    let q = BiPoly::from_f64(&t, 128);
    assert_eq!(q.eval_f64(x, y), 0.0);
    q
}

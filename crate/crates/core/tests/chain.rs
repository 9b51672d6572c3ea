//! The counting chain behind the tangency bound, checked link by link on
//! equations with at least two sign-changing cycles:
//!
//! 1. between consecutive roots of `Δ = T⁺ - T⁻` the graph of `T⁺` crosses `h = 0`;
//! 2. between consecutive such crossings, `m` changes sign along `h = 0`.

mod common;

use abelcycles::curves::{h_zero_branch_params, CurveParams};
use abelcycles::flow::AbelEq;
use abelcycles::poincare::{find_cycles, HalfMaps, SearchConfig, SignClass};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sign changes of `f` on `[lo, hi]`, located by bisection. Undefined
/// samples are skipped.
fn sign_changes<F: Fn(f64) -> Option<f64>>(f: F, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let s = lo + (hi - lo) * i as f64 / n as f64;
        let Some(v) = f(s) else { continue };
        if let Some((ps, pv)) = prev {
            if pv.signum() != v.signum() || v == 0.0 {
                let (mut a, mut b) = (ps, s);
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    match f(mid) {
                        Some(m) if m.signum() == pv.signum() && m != 0.0 => a = mid,
                        Some(_) => b = mid,
                        None => break,
                    }
                }
                out.push(0.5 * (a + b));
            }
        }
        prev = Some((s, v));
    }
    out
}

#[test]
fn cycles_force_h_crossings_and_m_sign_changes() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let cfg = SearchConfig::default();
    let mut checked = 0;
    let mut draws = 0;
    while checked < 50 {
        draws += 1;
        assert!(draws < 20_000, "too few equations with two sign-changing cycles");
        let (eq, _) = common::generic_params(&mut rng, 3.0);
        let rep = find_cycles(&eq, &cfg).unwrap();
        if rep.count(SignClass::SignChanging) < 2 {
            continue;
        }
        let nf = rep.normalization.unwrap();
        let neq = AbelEq::from_form(&nf);
        let p = CurveParams::from_eq(&neq).unwrap();
        let maps = HalfMaps::new(&neq).unwrap();
        let mut t1s: Vec<f64> = rep.cycles.iter().filter_map(|c| c.crossings.map(|c| c.0)).collect();
        t1s.sort_by(f64::total_cmp);

        let phi = |t: f64| maps.plus(t).map(|x| p.hbar(t, x));
        let mut crossings = Vec::new();
        for w in t1s.windows(2) {
            let here = sign_changes(&phi, w[0], w[1], 400);
            assert!(!here.is_empty(), "no h crossing between cycles at {} and {} for {eq:?}", w[0], w[1]);
            crossings.extend(here);
        }

        let z1s: Vec<f64> = crossings.iter().map(|&s| s + maps.plus(s).unwrap()).collect();
        let m_on_h = |z1: f64| {
            let z2 = h_zero_branch_params(&p, z1).ok()?;
            Some(p.mbar(0.5 * (z1 - z2), 0.5 * (z1 + z2)))
        };
        for w in z1s.windows(2) {
            let (lo, hi) = (w[0].min(w[1]), w[0].max(w[1]));
            assert!(
                !sign_changes(&m_on_h, lo, hi, 400).is_empty(),
                "m keeps its sign along h = 0 between z1 = {lo} and {hi} for {eq:?}"
            );
        }
        checked += 1;
    }
}

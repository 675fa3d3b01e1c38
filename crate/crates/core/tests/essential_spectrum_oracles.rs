//! Dispersion relation against closed forms for the band edges and tips.

use frontlab::essential_spectrum::{
    char_roots, classify_regime, default_k_grid, dispersion, kminus_threshold, tip_lambda_superslow,
    Dispersion, SpectrumRegime,
};
use frontlab::model::{LinearG, ModelParams, PowerH, ReactionSpec};
use num_complex::Complex64;
use proptest::prelude::*;

fn setup(eps: f64, tau: f64, h0: f64, g1: f64) -> (ModelParams, ReactionSpec) {
    let p = ModelParams::regular(eps, tau, g1).unwrap();
    (p, ReactionSpec::new(PowerH::new(h0, 1).unwrap(), LinearG::new(g1)))
}

/// `k±² = e(2τ+H0+G1 ± √(8τH0))/(1−eτ)` from solving `Δ = 0` as a quadratic in `k²`.
fn band_edges(eps: f64, tau: f64, h0: f64, g1: f64) -> (f64, f64) {
    let e = eps * eps;
    let s = 2.0 * tau + h0 + g1;
    let r = (8.0 * tau * h0).sqrt();
    let kk = |sign: f64| e * (s + sign * r) / (1.0 - e * tau);
    (kk(-1.0).max(0.0).sqrt(), kk(1.0).sqrt())
}

/// Residual of `Q` relative to the size of its terms.
fn relative_residual(d: &Dispersion, lambda: Complex64, k: f64) -> f64 {
    let (a, b, c) = d.coefficients(k);
    let scale = a.abs() * lambda.norm_sqr() + b.abs() * lambda.norm() + c.abs();
    d.eval(lambda, k).norm() / scale.max(1e-300)
}

#[test]
fn marginal_case_factors() {
    let p = ModelParams::super_slow(0.1, 1.0, 0.0).unwrap();
    let s = ReactionSpec::new(PowerH::new(0.0, 1).unwrap(), LinearG::new(0.0));
    let (l1, l2) = char_roots(0.0, &p, &s);
    assert_eq!((l1, l2), (Complex64::new(0.0, 0.0), Complex64::new(-2.0, 0.0)));
}

#[test]
fn large_k_slopes() {
    let (p, s) = setup(0.1, 1.0, 1.0, -1.0);
    let k = 10.0;
    let (l1, l2) = char_roots(k, &p, &s);
    assert!((l1.re / -(k * k) - 1.0).abs() < 0.05);
    assert!((l2.re / -(k * k / 0.01) - 1.0).abs() < 0.05);
}

#[test]
fn regime_examples() {
    let grid = default_k_grid();
    let (p, s) = setup(0.1, 1.0, -1.0, -1.0);
    assert_eq!(classify_regime(&p, &s, &grid).unwrap().regime, SpectrumRegime::AllReal);

    let (p, s) = setup(0.1, 1.0, 0.1, -1.0);
    let r = classify_regime(&p, &s, &grid).unwrap();
    assert_eq!(r.regime, SpectrumRegime::TwoComplexBands);
    let (km, kp) = band_edges(0.1, 1.0, 0.1, -1.0);
    assert!((r.k_minus.unwrap() - km).abs() < 1e-9 && (r.k_plus.unwrap() - kp).abs() < 1e-9);
    // discriminant sign scan oracle
    let d = Dispersion::new(&p, &s);
    assert!(d.discriminant(0.0) > 0.0 && d.discriminant(0.5 * (km + kp)) < 0.0 && d.discriminant(2.0 * kp) > 0.0);

    let (p, s) = setup(0.1, 1.0, 1.0, -1.0);
    let r = classify_regime(&p, &s, &grid).unwrap();
    assert_eq!(r.regime, SpectrumRegime::MergedComplexBand);
    assert!(r.k_minus.is_none());
    assert!((r.k_plus.unwrap() - band_edges(0.1, 1.0, 1.0, -1.0).1).abs() < 1e-9);

    let (p, s) = setup(0.1, 1.0, 0.0, -1.0);
    assert_eq!(classify_regime(&p, &s, &grid).unwrap().regime, SpectrumRegime::BoundaryH0Zero);

    let th = kminus_threshold(1.0, -1.0);
    assert!((th - 0.171_572_875_253_809_9).abs() < 1e-15);
    let (p, s) = setup(0.1, 1.0, th, -1.0);
    let r = classify_regime(&p, &s, &grid).unwrap();
    assert_eq!(r.regime, SpectrumRegime::BoundaryKMinusZero);
    assert_eq!(r.k_minus, Some(0.0));
}

#[test]
fn threshold_is_independent_of_epsilon() {
    for eps in [0.02, 0.1, 0.3] {
        for (h0, expected) in [(0.16, SpectrumRegime::TwoComplexBands), (0.18, SpectrumRegime::MergedComplexBand)] {
            let (p, s) = setup(eps, 1.0, h0, -1.0);
            assert_eq!(classify_regime(&p, &s, &default_k_grid()).unwrap().regime, expected);
        }
    }
}

#[test]
fn superslow_tip_is_the_scaled_k0_root() {
    let s = ReactionSpec::new(PowerH::new(1.0, 1).unwrap(), LinearG::new(0.0));
    let mut errors = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let p = ModelParams::super_slow(eps, 1.0, 2.0).unwrap();
        let tip = tip_lambda_superslow(&p, &s).unwrap();
        let (l1, _) = char_roots(0.0, &p, &s);
        let err = (l1.re / (eps * eps) - tip).abs() / tip.abs();
        assert!(err < 10.0 * eps * eps, "eps={eps}: {err}");
        errors.push(err);
    }
    // first order in ε²: error quarters as ε halves
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }
    let p = ModelParams::super_slow(0.02, 1.0, 2.0).unwrap();
    let (l1, _) = char_roots(0.0, &p, &s);
    assert!((l1.re / 4e-4 + 4.0).abs() < 10.0 * 4e-4 * 4.0);
}

#[test]
fn tip_dominance_fails_when_the_slow_tip_is_left_of_minus_two() {
    let (p, s) = setup(0.01, 0.05, 0.35, -2.5);
    let pts = dispersion(&p, &s, &default_k_grid());
    let at0 = pts[2000].lambda1.re;
    let max = pts.iter().fold(f64::NEG_INFINITY, |m, q| m.max(q.lambda1.re));
    assert!(at0 < -2.0 && max > at0 + 0.1 && max < -2.0);
}

proptest! {
    #[test]
    fn roots_satisfy_the_relation(
        k in -20.0f64..20.0,
        eps in 0.01f64..0.5,
        tau in 0.05f64..20.0,
        h0 in -3.0f64..3.0,
        g1 in -3.0f64..-0.01,
    ) {
        let (p, s) = setup(eps, tau, h0, g1);
        let d = Dispersion::new(&p, &s);
        let (l1, l2) = d.roots(k);
        prop_assert!(relative_residual(&d, l1, k) < 1e-12);
        prop_assert!(relative_residual(&d, l2, k) < 1e-12);
        let (a, b, c) = d.coefficients(k);
        let sum = l1 + l2;
        let prod = l1 * l2;
        prop_assert!((sum.re + b / a).abs() <= 1e-10 * (1.0 + (b / a).abs()) && sum.im.abs() <= 1e-10 * (1.0 + (b / a).abs()));
        prop_assert!((prod.re - c / a).abs() <= 1e-10 * (1.0 + (c / a).abs()));
        if l1.im != 0.0 {
            prop_assert_eq!(l1, l2.conj());
        }
        prop_assert!(l1.re >= l2.re);
        prop_assert_eq!(d.roots(-k), (l1, l2));
    }

    #[test]
    fn tip_dominates_when_stable(
        eps in 0.01f64..0.5,
        tau in 0.05f64..20.0,
        h0 in -3.0f64..3.0,
        g1 in -3.0f64..-0.01,
    ) {
        prop_assume!(h0 + g1 - 2.0 * tau < 0.0 && eps * eps * tau < 1.0);
        let (p, s) = setup(eps, tau, h0, g1);
        let pts = dispersion(&p, &s, &default_k_grid());
        let at0 = pts[2000].lambda1.re;
        // below −2 the k = 0 root is repelled past the fast curve, see the counterexample test
        prop_assume!(at0 > -2.0);
        prop_assert_eq!(pts[2000].k, 0.0);
        for q in &pts {
            prop_assert!(q.lambda1.re <= at0 + 1e-12 * at0.abs().max(1.0));
        }
        prop_assert!(at0 < 0.0);
    }
}

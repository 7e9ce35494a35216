use firey_core::gclass::{check_an, extend_an, glue_g_eps, GFunction, GTab, Preset, ViolationKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn critical_powers_are_flat_in_every_dimension() {
    for n in 2..=6usize {
        let tab = Preset::Power(-(n as f64) - 1.0).tabulate(n, 0.5, 2.0, 4096).unwrap();
        let cert = check_an(&tab);
        assert!(!cert.pass);
        assert_eq!(cert.violation.unwrap().kind, ViolationKind::Flat);
    }
}

#[test]
fn power_on_the_far_side_of_the_threshold_decreases() {
    let tab = Preset::Power(-4.5).tabulate(3, 0.5, 2.0, 4096).unwrap();
    let cert = check_an(&tab);
    assert_eq!(cert.violation.unwrap().kind, ViolationKind::Decreasing);
}

#[test]
fn linear_g_extension_matches_symbolic_antiderivative() {
    // G(θ) = θ on [1, 2], n = 2: F = θḠ + 2H̄ with H̄ = θ/2·1 below 1 and θ²/2 on [1, 2].
    let tab = Preset::Power(1.0).tabulate(2, 1.0, 2.0, 4096).unwrap();
    let ext = extend_an(&tab, 5.0).unwrap();
    assert_eq!(ext.f(0.0), 0.0);
    for t in [0.25, 0.5, 0.9] {
        assert!((ext.f(t) - 3.0 * t).abs() < 1e-12);
    }
    for t in [1.0, 1.3, 1.9, 2.0] {
        assert!((ext.hbar(t) - (t * t / 2.0 + 0.5)).abs() < 1e-9, "t={t}");
        assert!((ext.f(t) - (2.0 * t * t + 1.0)).abs() < 1e-9);
    }
    let mut prev = 0.0;
    for i in 1..=500 {
        let f = ext.f(5.0 * i as f64 / 500.0);
        assert!(f > prev);
        prev = f;
    }
}

#[test]
fn moment_identity_at_random_points() {
    let tab = Preset::IncreasingDemo.tabulate(3, 0.8, 1.6, 1025).unwrap();
    let ext = extend_an(&tab, 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..50 {
        let t = rng.gen_range(0.05..3.0);
        assert!((ext.moment_identity(t) - ext.hbar(t)).abs() < 1e-10 * ext.hbar(t).max(1.0), "t={t}");
    }
}

#[test]
fn extensions_certify_on_subintervals() {
    let tab = Preset::Power(-2.0).tabulate(2, 0.7, 1.4, 2049).unwrap();
    let ext = extend_an(&tab, 4.0).unwrap();
    for (lo, hi) in [(0.1, 0.7), (0.3, 1.0), (1.2, 3.9), (0.05, 4.0)] {
        let sub = GTab::tabulate(&ext, 2, lo, hi, 1024).unwrap();
        assert!(check_an(&sub).pass, "[{lo}, {hi}]");
    }
}

#[test]
fn glued_g_keeps_samples_and_has_bounded_sup_as_eps_shrinks() {
    let tab = Preset::IncreasingDemo.tabulate(2, 1.0, 2.0, 4097).unwrap();
    let (a1, a2) = (0.5 * tab.eval(1.0), 1.5 * tab.eval(2.0));
    let bound = a2.max(tab.max_sample());
    let mut sups = Vec::new();
    for k in 0..6 {
        let eps = 0.2 / 2f64.powi(k);
        let out = glue_g_eps(&tab, 1.0, 2.0, a1, a2, eps).unwrap();
        assert!(out.certificate.pass, "eps={eps}");
        for i in 0..tab.len() {
            let t = tab.theta(i);
            if t >= 1.0 + eps && t <= 2.0 - eps {
                assert_eq!(out.g.samples()[i], tab.samples()[i]);
            }
        }
        sups.push(out.sup);
    }
    assert!(sups.iter().all(|&s| s <= bound + 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn powers_above_the_threshold_are_members(n in 2usize..6, frac in 0.05f64..1.0, c1 in 0.2f64..1.0, w in 0.3f64..3.0) {
        let p = -(n as f64) - 1.0 + frac * (n as f64 + 4.0);
        let tab = Preset::Power(p).tabulate(n, c1, c1 + w, 2048).unwrap();
        prop_assert!(check_an(&tab).pass, "p = {p}");
    }

    #[test]
    fn increasing_positive_g_are_members(seed in 0u64..1_000_000, n in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (rng.gen_range(0.1..2.0), rng.gen_range(0.05..2.0), rng.gen_range(0.0..0.5));
        let tab = GTab::from_fn(n, 0.5, 2.5, 2048, |t| a + b * t + c * t * t + 0.1 * b * (4.0 * t).tanh()).unwrap();
        prop_assert!(check_an(&tab).pass);
    }
}

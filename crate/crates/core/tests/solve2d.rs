use firey_core::gclass::{GFunction, Preset};
use firey_core::geometry_core::body::ProfileSupport;
use firey_core::geometry_core::grid::CircleGrid;
use firey_core::geometry_core::spectral::{fourier_shift, spectral_derivative};
use firey_core::solve2d::{
    classify_solution, constant_solution, local_extremum_inequalities, rotation_distance, solve_periodic, BvpProblem,
    Tag,
};
use firey_core::FireyError;

fn residual(h: &[f64], g: &dyn GFunction) -> f64 {
    let d2 = spectral_derivative(h, 2);
    h.iter().zip(&d2).map(|(v, d)| (d + v - g.eval(*v)).abs()).fold(0.0, f64::max)
}

#[test]
fn class_members_give_only_the_centred_circle() {
    for g in [Preset::Power(-1.5), Preset::Power(0.5), Preset::Power(3.0)] {
        let set = solve_periodic(&BvpProblem::new(&g, 12, 7)).unwrap();
        let c = constant_solution(&g);
        assert!(!set.solutions.is_empty());
        for s in &set.solutions {
            assert_eq!(s.classification.tag, Tag::CircleCentered, "{}", g.name());
            assert!(s.h.iter().all(|v| (v - c).abs() <= 1e-8));
            assert!(s.residual <= 1e-10 && s.fine_residual <= 1e-8 && s.min_curvature > 0.0);
        }
    }
}

#[test]
fn constant_g_solutions_are_translated_unit_discs() {
    let g = Preset::Const(1.0);
    let set = solve_periodic(&BvpProblem::new(&g, 8, 1)).unwrap();
    assert!(set.solutions.iter().any(|s| s.classification.tag == Tag::CircleTranslated));
    for s in &set.solutions {
        assert!(matches!(s.classification.tag, Tag::CircleTranslated | Tag::CircleCentered));
        assert!((s.classification.radius - 1.0).abs() < 1e-8);
    }
}

#[test]
fn critical_power_gives_an_ellipse_family_closed_under_rotation() {
    let g = Preset::Power(-3.0);
    let set = solve_periodic(&BvpProblem::new(&g, 16, 0)).unwrap();
    let ellipses: Vec<_> = set.solutions.iter().filter(|s| s.classification.tag == Tag::EllipseFamily).collect();
    assert!(ellipses.len() >= 3);
    let products: Vec<f64> = ellipses
        .iter()
        .map(|s| {
            let (a, b) = s.classification.semi_axes;
            (a * b).powi(2)
        })
        .collect();
    let spread = products.iter().fold(0.0f64, |m, p| m.max((p - products[0]).abs()));
    assert!(spread <= 1e-6);
    for s in &ellipses {
        for alpha in [0.3, 1.1, 2.9] {
            let rot = fourier_shift(&s.h, alpha);
            assert!(residual(&rot, &g) < 1e-8);
            let grid = CircleGrid::new(rot.len()).unwrap();
            let tag = classify_solution(&ProfileSupport::new(grid, rot.clone()).unwrap()).tag;
            assert_eq!(tag, Tag::EllipseFamily);
            assert!(rotation_distance(&rot, &s.h) < 1e-8);
        }
    }
}

#[test]
fn solutions_are_sorted_and_distinct() {
    let g = Preset::Power(-3.0);
    let set = solve_periodic(&BvpProblem::new(&g, 16, 3)).unwrap();
    for w in set.solutions.windows(2) {
        assert!(w[0].residual <= w[1].residual);
    }
    for i in 0..set.solutions.len() {
        for j in 0..i {
            assert!(rotation_distance(&set.solutions[i].h, &set.solutions[j].h) > 1e-6);
        }
    }
}

#[test]
fn solver_is_deterministic() {
    let g = Preset::Power(-2.5);
    let a = solve_periodic(&BvpProblem::new(&g, 6, 42)).unwrap();
    let b = solve_periodic(&BvpProblem::new(&g, 6, 42)).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn g_above_the_diagonal_has_no_solution() {
    // Integrating h'' + h = G(h) gives ∫h = ∫G(h) > ∫h.
    let set = solve_periodic(&BvpProblem::new(&Preset::IncreasingDemo, 2, 0));
    assert!(matches!(set, Err(FireyError::NonConvergence { .. })));
}

#[test]
fn unreachable_g_reports_nonconvergence() {
    // G(θ) = θ^2 + 1 > θ has no constant solution, and h'' + h = G(h) has
    // no positive periodic solution since integrating gives ∫h = ∫(h² + 1).
    struct Shifted;
    impl GFunction for Shifted {
        fn eval(&self, t: f64) -> f64 {
            t * t + 1.0
        }
        fn deriv(&self, t: f64) -> f64 {
            2.0 * t
        }
        fn domain(&self) -> (f64, f64) {
            (f64::MIN_POSITIVE, f64::INFINITY)
        }
    }
    let mut prob = BvpProblem::new(&Shifted, 4, 0);
    prob.max_iter = 20;
    match solve_periodic(&prob) {
        Err(FireyError::NonConvergence { .. }) => {}
        other => panic!("expected nonconvergence, got {:?}", other.map(|s| s.solutions.len())),
    }
}

#[test]
fn extremum_check_flags_a_non_solution() {
    let grid = CircleGrid::new(256).unwrap();
    let body = ProfileSupport::from_fn(grid, |p| 1.0 + 0.1 * (2.0 * p).cos()).unwrap();
    let rep = local_extremum_inequalities(&body, &Preset::Power(3.0), 1e-8).unwrap();
    assert!(rep.violations > 0 && !rep.all_hold);
}

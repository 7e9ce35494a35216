use firey_core::construct::{
    build_counterexample, glue_central_symmetric, glue_spherical_caps, synthetic_cap_example, tangency_glue,
    uniform_convergence_sweep, verify_counterexample,
};
use firey_core::geometry_core::body::{AxisymBody, Body, ProfileSupport};
use firey_core::geometry_core::grid::CircleGrid;
use firey_core::measure_calculus::{density, DiffMode};
use firey_core::solve2d::local_extremum_inequalities;
use firey_core::FireyError;

fn grid(n: usize) -> CircleGrid {
    CircleGrid::new(n).unwrap()
}

#[test]
fn cap_gluing_excluded_set_shrinks_with_eps() {
    for n in [2usize, 3] {
        let ex = synthetic_cap_example(grid(2048), n).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..9 {
            let eps = 0.02 / 2f64.powi(k);
            let caps = glue_spherical_caps(&ex.spec, n, &ex.g, eps).unwrap();
            // Quartic contact at r1 contributes eps^(1/4) and the pole at r2
            // eps^(1/2) or faster, so each halving shrinks the measure by a
            // factor between 2^(-1/2) and 2^(-1/4).
            if k > 0 {
                let ratio = caps.u_eps_measure / last;
                assert!(ratio > 0.5f64.sqrt() - 0.01 && ratio < 0.5f64.powf(0.25), "n={n} eps={eps}: ratio {ratio}");
            }
            assert!(caps.residual.max_abs <= 1e-5, "n={n} eps={eps}: residual {}", caps.residual.max_abs);
            last = caps.u_eps_measure;
        }
    }
}

#[test]
fn central_glue_preserves_upper_density() {
    let g = grid(2048);
    let prof = ProfileSupport::from_fn(g, |phi| 1.0 + 0.05 * phi.sin().powi(3)).unwrap();
    let k = AxisymBody::new(3, prof).unwrap();
    let out = glue_central_symmetric(&k).unwrap();
    let f_in = density(&k, DiffMode::FiniteDifference).unwrap();
    let f_out = density(&out, DiffMode::FiniteDifference).unwrap();
    for j in 0..g.len() {
        let away_from_equator = g.sin_at(j) > 4.0 * g.step();
        if away_from_equator {
            assert!((f_in.f[j] - f_out.f[j]).abs() < 1e-9, "node {j}");
        }
        assert!((out.profile().values()[j] - out.profile().values()[g.antipode_index(j)]).abs() < 1e-15);
    }
    let again = glue_central_symmetric(&out).unwrap();
    assert_eq!(again.profile().values(), out.profile().values());
}

#[test]
fn identical_discs_glue_to_the_disc() {
    let g = grid(1024);
    let d = ProfileSupport::disc(g, 1.0, [0.0, 0.0]).unwrap();
    let s = 0.5f64.sqrt();
    let out = tangency_glue(&d, &d, [s, s], [-s, -s]).unwrap();
    let diff = out.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-9);
}

#[test]
fn crossing_bodies_are_rejected() {
    let g = grid(1024);
    let a = ProfileSupport::disc(g, 1.0, [0.0, 0.0]).unwrap();
    let b = ProfileSupport::disc(g, 1.0, [1.0, 0.0]).unwrap();
    let y = 0.75f64.sqrt();
    let err = tangency_glue(&a, &b, [0.5, y], [0.5, -y]).unwrap_err();
    assert!(matches!(err, FireyError::TangentMismatch { .. }));
}

#[test]
fn counterexample_pipeline_in_two_and_three_dimensions() {
    for n in [2usize, 3] {
        let c = build_counterexample(n, 1.0, 0.1, None).unwrap();
        let rep = verify_counterexample(&c).unwrap();
        assert!(rep.residual.max_abs <= 1e-6, "n={n}: {}", rep.residual.max_abs);
        assert!(rep.an.pass && rep.sufficient_min > 0.0);
        assert!(rep.central_symmetry == 0.0);
        assert!(rep.non_sphericity > 0.0);
        assert!(rep.translation_identity < 1e-8);
        assert!((rep.barycentre[1] - 0.1).abs() < 1e-9 && rep.barycentre[0].abs() < 1e-12);
        assert!(rep.witness.is_some());
        assert!((rep.outer_density - 1.0).abs() < 1e-8);
    }
}

#[test]
fn outer_density_is_r_to_the_n_minus_one() {
    let c = build_counterexample(3, 1.5, 0.2, Some(16384.0)).unwrap();
    let rep = verify_counterexample(&c).unwrap();
    assert!((rep.outer_density - 2.25).abs() < 1e-8);
    assert_eq!(rep.outer_matches, "r^(n-1)");
}

#[test]
fn g_m_tends_to_the_constant_along_the_sweep() {
    let sweep = uniform_convergence_sweep(3, 1.0, 0.1, 16384.0, 4).unwrap();
    for w in sweep.windows(2) {
        assert!(w[1].1 < w[0].1);
        assert!(w[1].2 < w[0].2);
    }
    assert!(sweep.last().unwrap().1 <= 1e-2);
}

#[test]
fn too_small_scale_is_rejected() {
    let err = build_counterexample(3, 1.0, 0.1, Some(1.0)).unwrap_err();
    assert!(matches!(err, FireyError::Precondition(_)));
    let err = build_counterexample(3, 0.15, 0.1, None).unwrap_err();
    assert!(matches!(err, FireyError::Precondition(_)));
}

#[test]
fn extremum_inequalities_hold_on_the_counterexample() {
    for n in [2usize, 3] {
        let c = build_counterexample(n, 1.0, 0.1, None).unwrap();
        let rep = local_extremum_inequalities(&c.shifted, &c.g_m, 1e-6).unwrap();
        assert!(!rep.checks.is_empty());
        assert!(rep.all_hold, "n={n}: {} violation(s)", rep.violations);
    }
}

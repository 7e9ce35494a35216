//! Periodic solver for h″ + h = G(h) on the circle, the solution
//! classifier, and the local-extremum inequalities.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{FireyError, Result};
use crate::gclass::GFunction;
use crate::geometry_core::body::{Body, ProfileSupport};
use crate::geometry_core::centroid::barycentre;
use crate::geometry_core::duality::gauss_preimage;
use crate::geometry_core::grid::CircleGrid;
use crate::geometry_core::polygon::Vec2;
use crate::geometry_core::spectral::{fourier_multiplier, fourier_shift, resample, spectral_derivative};

/// Collocation nodes used by default.
pub const DEFAULT_NODES: usize = 256;
/// Newton stopping tolerance on the sup residual.
pub const NEWTON_TOL: f64 = 1e-10;
/// Tolerance of the independent re-check on the doubled grid.
pub const FINE_TOL: f64 = 1e-8;
/// Roundoff floor of the collocation residual: the spectral second
/// derivative amplifies rounding by about (N/2)².
pub fn residual_floor(nodes: usize, scale: f64) -> f64 {
    8.0 * f64::EPSILON * (nodes as f64 / 2.0).powi(2) * scale
}

/// Sup distance (modulo rotation) above which two solutions are distinct.
pub const DISTINCT_TOL: f64 = 1e-6;

/// Dense second-derivative matrix of the trigonometric interpolant on N
/// equispaced nodes (N even).
pub fn second_derivative_matrix(n: usize) -> DMatrix<f64> {
    let h = TAU / n as f64;
    DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            -PI * PI / (3.0 * h * h) - 1.0 / 6.0
        } else {
            let d = j as isize - k as isize;
            let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let s = (d as f64 * h / 2.0).sin();
            -0.5 * sign / (s * s)
        }
    })
}

/// Initial profile and a label describing it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Seed {
    pub label: String,
    pub h: Vec<f64>,
}

/// Smallest positive fixed point of θ = G(θ) found by a logarithmic scan
/// of the domain, or the domain midpoint when none exists.
pub fn constant_solution(g: &dyn GFunction) -> f64 {
    let (lo, hi) = g.domain();
    let (a, b) = (lo.max(1e-3), hi.min(1e3));
    let m = 4000;
    let at = |i: usize| a * (b / a).powf(i as f64 / m as f64);
    let f = |t: f64| g.eval(t) - t;
    for i in 0..m {
        let (x0, x1) = (at(i), at(i + 1));
        let (f0, f1) = (f(x0), f(x1));
        if f0 == 0.0 {
            return x0;
        }
        if f0.signum() != f1.signum() {
            let (mut l, mut r, mut fl) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (l + r);
                let fm = f(mid);
                if fm.signum() == fl.signum() {
                    l = mid;
                    fl = fm;
                } else {
                    r = mid;
                }
            }
            return 0.5 * (l + r);
        }
    }
    0.5 * (a + b)
}

/// Constant, cos-perturbed, sin-perturbed and random smooth seeds around c.
pub fn default_seeds(count: usize, nodes: usize, c: f64, rng_seed: u64) -> Vec<Seed> {
    let grid: Vec<f64> = (0..nodes).map(|k| TAU * k as f64 / nodes as f64).collect();
    let trig = |label: &str, k: f64, eps: f64, sine: bool| Seed {
        label: label.to_string(),
        h: grid.iter().map(|&p| c * (1.0 + eps * if sine { (k * p).sin() } else { (k * p).cos() })).collect(),
    };
    let mut out = vec![
        Seed { label: "constant".into(), h: vec![c; nodes] },
        trig("cos1:0.1", 1.0, 0.1, false),
        trig("sin1:0.1", 1.0, 0.1, true),
        trig("cos2:0.1", 2.0, 0.1, false),
        trig("cos2:0.2", 2.0, 0.2, false),
        trig("cos2:0.3", 2.0, 0.3, false),
        trig("sin2:0.1", 2.0, 0.1, true),
        trig("cos3:0.05", 3.0, 0.05, false),
        trig("sin3:0.05", 3.0, 0.05, true),
        trig("cos1:0.3", 1.0, 0.3, false),
        trig("sin1:0.3", 1.0, 0.3, true),
    ];
    let mut i = 0u64;
    while out.len() < count {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed.wrapping_add(i));
        let coef: Vec<(f64, f64)> = (1..=4)
            .map(|k| {
                let s = 0.08 / (k * k) as f64;
                (rng.gen_range(-s..s), rng.gen_range(-s..s))
            })
            .collect();
        let h = grid
            .iter()
            .map(|&p| {
                c * (1.0
                    + coef
                        .iter()
                        .enumerate()
                        .map(|(k, (a, b))| a * ((k + 1) as f64 * p).cos() + b * ((k + 1) as f64 * p).sin())
                        .sum::<f64>())
            })
            .collect();
        out.push(Seed { label: format!("random:{}", rng_seed.wrapping_add(i)), h });
        i += 1;
    }
    out.truncate(count);
    out
}

/// Problem data for the periodic solver.
pub struct BvpProblem<'a> {
    pub g: &'a dyn GFunction,
    pub nodes: usize,
    pub seeds: Vec<Seed>,
    pub solver: LinearSolver,
    pub newton_tol: f64,
    pub max_iter: usize,
}

impl<'a> BvpProblem<'a> {
    /// Default controls with `count` seeds around the constant solution on
    /// `nodes` collocation points.
    pub fn with_nodes(g: &'a dyn GFunction, nodes: usize, count: usize, rng_seed: u64) -> Self {
        let c = constant_solution(g);
        BvpProblem {
            g,
            nodes,
            seeds: default_seeds(count, nodes, c, rng_seed),
            solver: LinearSolver::auto(nodes),
            newton_tol: NEWTON_TOL,
            max_iter: 60,
        }
    }

    /// Default controls with `count` seeds around the constant solution.
    pub fn new(g: &'a dyn GFunction, count: usize, rng_seed: u64) -> Self {
        Self::with_nodes(g, DEFAULT_NODES, count, rng_seed)
    }
}

/// Classification tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tag {
    CircleCentered,
    CircleTranslated,
    EllipseFamily,
    Other,
}

/// Classifier output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Classification {
    pub tag: Tag,
    /// Sup residual of the fit by span{1, cos φ, sin φ}.
    pub circle_fit: f64,
    pub radius: f64,
    pub center: Vec2,
    /// Sup residual of the fit h² ≈ A + B cos 2φ + C sin 2φ.
    pub ellipse_fit: f64,
    pub semi_axes: (f64, f64),
    pub ellipse_angle: f64,
    /// Best reflection axis (angle in [0, π)) and its sup deviation.
    pub axis: f64,
    pub axis_deviation: f64,
    /// h̄ monotone between the two axis directions.
    pub monotone_in_frame: bool,
}

/// Tolerance of the circle and ellipse fits.
pub const FIT_TOL: f64 = 1e-8;

fn lstsq(cols: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let (m, k) = (y.len(), cols.len());
    let a = DMatrix::from_fn(m, k, |i, j| cols[j][i]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-14).unwrap_or_else(|_| DVector::zeros(k));
    let r = (&a * &x - &b).amax();
    (x.iter().copied().collect(), r)
}

pub fn classify_solution(h: &ProfileSupport) -> Classification {
    let g = h.grid();
    let n = g.len();
    let v = h.values();
    let scale = h.max_value().abs().max(1.0);
    let ones = vec![1.0; n];
    let c1: Vec<f64> = (0..n).map(|k| g.cos_at(k)).collect();
    let s1: Vec<f64> = (0..n).map(|k| g.sin_at(k)).collect();
    let (x, circle_fit) = lstsq(&[ones.clone(), c1, s1], v);
    let c2: Vec<f64> = (0..n).map(|k| (2.0 * g.angle(k)).cos()).collect();
    let s2: Vec<f64> = (0..n).map(|k| (2.0 * g.angle(k)).sin()).collect();
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    let (y, ellipse_fit) = lstsq(&[ones, c2, s2], &sq);
    let rad = y[1].hypot(y[2]);
    let semi_axes = ((y[0] + rad).max(0.0).sqrt(), (y[0] - rad).max(0.0).sqrt());
    let ellipse_angle = 0.5 * y[2].atan2(y[1]);
    let tag = if circle_fit <= FIT_TOL * scale {
        if x[1].hypot(x[2]) <= FIT_TOL * scale {
            Tag::CircleCentered
        } else {
            Tag::CircleTranslated
        }
    } else if ellipse_fit <= FIT_TOL * scale * scale {
        Tag::EllipseFamily
    } else {
        Tag::Other
    };
    // Reflection across the line at angle α maps node k to node j − k with
    // 2α = j·Δφ.
    let (mut best_j, mut best_dev) = (0, f64::INFINITY);
    for j in 0..n {
        let dev = (0..n).map(|k| (v[k] - v[(j + n - k) % n]).abs()).fold(0.0, f64::max);
        if dev < best_dev {
            best_dev = dev;
            best_j = j;
        }
    }
    let axis = (0.5 * g.step() * best_j as f64).rem_euclid(PI);
    // Walk from one axis direction to the opposite one.
    let half = n / 2;
    let start = if best_j % 2 == 0 { best_j / 2 } else { best_j.div_ceil(2) };
    let seq: Vec<f64> = (0..=half).map(|i| v[(start + i) % n]).collect();
    let tol = 1e-9 * scale;
    let inc = seq.windows(2).all(|w| w[1] >= w[0] - tol);
    let dec = seq.windows(2).all(|w| w[1] <= w[0] + tol);
    Classification {
        tag,
        circle_fit,
        radius: x[0],
        center: [x[1], x[2]],
        ellipse_fit,
        semi_axes,
        ellipse_angle,
        axis,
        axis_deviation: best_dev,
        monotone_in_frame: inc || dec,
    }
}

/// A converged, certified solution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Solution {
    pub seed: String,
    pub h: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Sup residual after spectral resampling to twice the nodes.
    pub fine_residual: f64,
    pub min_curvature: f64,
    pub barycentre: Vec2,
    pub classification: Classification,
}

/// Per-seed outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub label: String,
    pub converged: bool,
    pub iterations: usize,
    pub best_residual: f64,
    pub note: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionSet {
    pub nodes: usize,
    pub solutions: Vec<Solution>,
    pub seeds: Vec<SeedOutcome>,
}

/// Linear solver used inside each Newton step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearSolver {
    /// Dense collocation Jacobian, truncated SVD (minimum-norm step).
    DenseSvd,
    /// Matrix-free FFT operator with a Fourier preconditioner and GMRES.
    SpectralGmres,
}

impl LinearSolver {
    /// Dense up to 512 nodes, matrix-free beyond.
    pub fn auto(nodes: usize) -> Self {
        if nodes <= 512 {
            LinearSolver::DenseSvd
        } else {
            LinearSolver::SpectralGmres
        }
    }
}

enum Operator {
    Dense(DMatrix<f64>),
    Spectral,
}

impl Operator {
    fn d2(&self, h: &DVector<f64>) -> DVector<f64> {
        match self {
            Operator::Dense(m) => m * h,
            Operator::Spectral => DVector::from_vec(spectral_derivative(h.as_slice(), 2)),
        }
    }

    fn residual(&self, g: &dyn GFunction, h: &DVector<f64>) -> Option<DVector<f64>> {
        let (lo, hi) = g.domain();
        if h.iter().any(|&v| !(v > lo.max(0.0) && v <= hi && v.is_finite())) {
            return None;
        }
        let gh = h.map(|v| g.eval(v));
        Some(self.d2(h) + h - gh)
    }

    fn step(&self, g: &dyn GFunction, h: &DVector<f64>, r: &DVector<f64>) -> Option<DVector<f64>> {
        let dg: Vec<f64> = h.iter().map(|&v| g.deriv(v)).collect();
        match self {
            Operator::Dense(d2) => {
                let mut jac = d2.clone();
                for (k, d) in dg.iter().enumerate() {
                    jac[(k, k)] += 1.0 - d;
                }
                let svd = jac.svd(true, true);
                let smax = svd.singular_values.max();
                svd.solve(&(-r), 1e-10 * smax).ok()
            }
            Operator::Spectral => {
                let gamma = dg.iter().sum::<f64>() / dg.len() as f64;
                let precond = |v: &[f64]| {
                    fourier_multiplier(v, |k| {
                        let d = 1.0 - (k * k) as f64 - gamma;
                        if d.abs() < 1e-8 {
                            0.0
                        } else {
                            1.0 / d
                        }
                    })
                };
                let apply = |v: &[f64]| -> Vec<f64> {
                    let d = spectral_derivative(v, 2);
                    (0..v.len()).map(|k| d[k] + v[k] - dg[k] * v[k]).collect()
                };
                let b: Vec<f64> = r.iter().map(|x| -x).collect();
                let y = gmres(&apply, &precond, &b, 1e-13, 400)?;
                Some(DVector::from_vec(precond(&y)))
            }
        }
    }
}

/// Right-preconditioned GMRES for A·M·y = b with Givens rotations.
fn gmres(
    a: &dyn Fn(&[f64]) -> Vec<f64>,
    m: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    rtol: f64,
    max_iter: usize,
) -> Option<Vec<f64>> {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let beta = dot(b, b).sqrt();
    let n = b.len();
    if beta == 0.0 {
        return Some(vec![0.0; n]);
    }
    let mut basis: Vec<Vec<f64>> = vec![b.iter().map(|x| x / beta).collect()];
    let mut hess: Vec<Vec<f64>> = Vec::new();
    let (mut cs, mut sn) = (Vec::<f64>::new(), Vec::<f64>::new());
    let mut e = vec![beta];
    for j in 0..max_iter {
        let mut w = a(&m(&basis[j]));
        let mut col = vec![0.0; j + 2];
        for (i, v) in basis.iter().enumerate() {
            col[i] = dot(&w, v);
            w.iter_mut().zip(v).for_each(|(x, y)| *x -= col[i] * y);
        }
        col[j + 1] = dot(&w, &w).sqrt();
        for i in 0..j {
            let t = cs[i] * col[i] + sn[i] * col[i + 1];
            col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
            col[i] = t;
        }
        let rho = col[j].hypot(col[j + 1]);
        if rho == 0.0 {
            break;
        }
        let (c, s) = (col[j] / rho, col[j + 1] / rho);
        cs.push(c);
        sn.push(s);
        let sub = col[j + 1];
        col[j] = rho;
        col[j + 1] = 0.0;
        e.push(-s * e[j]);
        e[j] *= c;
        hess.push(col);
        let done = e[j + 1].abs() <= rtol * beta;
        if done || sub <= 1e-14 * beta || j + 1 == max_iter {
            break;
        }
        basis.push(w.iter().map(|x| x / sub).collect());
    }
    let k = hess.len();
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|l| hess[l][i] * y[l]).sum();
        if hess[i][i] == 0.0 {
            return None;
        }
        y[i] = (e[i] - s) / hess[i][i];
    }
    let mut out = vec![0.0; n];
    for (i, yi) in y.iter().enumerate() {
        out.iter_mut().zip(&basis[i]).for_each(|(o, v)| *o += yi * v);
    }
    Some(out)
}

fn newton(
    op: &Operator,
    g: &dyn GFunction,
    seed: &Seed,
    tol: f64,
    max_iter: usize,
) -> (Option<(Vec<f64>, usize, f64)>, SeedOutcome) {
    let mut h = DVector::from_column_slice(&seed.h);
    let fail = |it: usize, best: f64, note: &str| SeedOutcome {
        label: seed.label.clone(),
        converged: false,
        iterations: it,
        best_residual: best,
        note: note.to_string(),
    };
    let Some(mut r) = op.residual(g, &h) else {
        return (None, fail(0, f64::INFINITY, "seed leaves the G domain"));
    };
    let mut best = r.amax();
    for it in 0..max_iter {
        let rn = r.amax();
        best = best.min(rn);
        if rn <= tol {
            let out = SeedOutcome {
                label: seed.label.clone(),
                converged: true,
                iterations: it,
                best_residual: rn,
                note: String::new(),
            };
            return (Some((h.iter().copied().collect(), it, rn)), out);
        }
        let Some(step) = op.step(g, &h, &r) else {
            return (None, fail(it, best, "linear solve failed"));
        };
        let r2 = r.norm();
        let mut alpha = 1.0;
        loop {
            let cand = &h + alpha * &step;
            if let Some(rc) = op.residual(g, &cand) {
                if rc.norm() < (1.0 - 1e-4 * alpha) * r2 || rc.amax() <= tol {
                    h = cand;
                    r = rc;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-10 {
                return (None, fail(it, best, "line search stalled"));
            }
        }
    }
    (None, fail(max_iter, best, "iteration limit"))
}

/// Sup distance between two profiles modulo rotation: best discrete shift,
/// then golden-section refinement of a continuous rotation.
pub fn rotation_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let (mut best_s, mut best) = (0, f64::INFINITY);
    for s in 0..n {
        let d = (0..n).map(|k| (a[k] - b[(k + s) % n]).abs()).fold(0.0, f64::max);
        if d < best {
            best = d;
            best_s = s;
        }
    }
    let step = TAU / n as f64;
    let dist = |alpha: f64| a.iter().zip(fourier_shift(b, alpha)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let c = step * best_s as f64;
    let (mut lo, mut hi) = (c - step, c + step);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = hi - r * (hi - lo);
        let x2 = lo + r * (hi - lo);
        if dist(x1) < dist(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best.min(dist(0.5 * (lo + hi)))
}

/// Newton on the collocation equations from every seed (in parallel), then
/// certification, classification and de-duplication modulo rotation.
pub fn solve_periodic(prob: &BvpProblem) -> Result<SolutionSet> {
    let n = prob.nodes;
    let grid = CircleGrid::new(n)?;
    if let Some(s) = prob.seeds.iter().find(|s| s.h.len() != n) {
        return Err(FireyError::GridMismatch { left: s.h.len(), right: n });
    }
    let op = match prob.solver {
        LinearSolver::DenseSvd => Operator::Dense(second_derivative_matrix(n)),
        LinearSolver::SpectralGmres => Operator::Spectral,
    };
    let g = prob.g;
    let scale = prob.seeds.iter().flat_map(|s| s.h.iter()).fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = prob.newton_tol.max(residual_floor(n, scale));
    let runs: Vec<(Option<(Vec<f64>, usize, f64)>, SeedOutcome)> =
        prob.seeds.par_iter().map(|s| newton(&op, g, s, tol, prob.max_iter)).collect();
    let mut outcomes = Vec::with_capacity(runs.len());
    let mut candidates = Vec::new();
    for ((sol, mut out), seed) in runs.into_iter().zip(&prob.seeds) {
        if let Some((h, it, res)) = sol {
            let fine = resample(&h, 2 * n);
            let d = spectral_derivative(&fine, 2);
            let fine_res = fine.iter().zip(&d).map(|(v, dd)| (dd + v - g.eval(*v)).abs()).fold(0.0, f64::max);
            let curv = spectral_derivative(&h, 2);
            let min_curv = h.iter().zip(&curv).map(|(a, b)| a + b).fold(f64::INFINITY, f64::min);
            if fine_res > FINE_TOL || min_curv <= 0.0 {
                out.converged = false;
                out.note = format!("rejected: fine residual {fine_res:.3e}, min curvature radius {min_curv:.3e}");
            } else {
                let prof = ProfileSupport::new(grid, h.clone())?;
                let classification = classify_solution(&prof);
                let b = barycentre(&prof)?;
                candidates.push(Solution {
                    seed: seed.label.clone(),
                    h,
                    iterations: it,
                    residual: res,
                    fine_residual: fine_res,
                    min_curvature: min_curv,
                    barycentre: b,
                    classification,
                });
            }
        }
        outcomes.push(out);
    }
    candidates.sort_by(|a, b| {
        a.residual.total_cmp(&b.residual).then_with(|| {
            a.h.iter().zip(&b.h).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let mut solutions: Vec<Solution> = Vec::new();
    for c in candidates {
        if solutions.iter().all(|s| rotation_distance(&s.h, &c.h) > DISTINCT_TOL) {
            solutions.push(c);
        }
    }
    if solutions.is_empty() {
        let best = outcomes.iter().map(|o| o.best_residual).fold(f64::INFINITY, f64::min);
        return Err(FireyError::NonConvergence {
            what: "periodic solver".into(),
            detail: format!("no seed converged; best residual {best:.3e}"),
            trace: outcomes.iter().map(|o| o.best_residual).collect(),
        });
    }
    Ok(SolutionSet { nodes: n, solutions, seeds: outcomes })
}

/// Continuation along a path of power exponents: each stage is seeded with
/// the solutions of the previous one plus the default seeds.
pub fn solve_power_continuation(path: &[f64], count: usize, rng_seed: u64) -> Result<Vec<SolutionSet>> {
    let mut out: Vec<SolutionSet> = Vec::new();
    for &p in path {
        let g = crate::gclass::Preset::Power(p);
        let mut prob = BvpProblem::new(&g, count, rng_seed);
        if let Some(prev) = out.last() {
            for (i, s) in prev.solutions.iter().enumerate() {
                prob.seeds.push(Seed { label: format!("continued:{i}"), h: s.h.clone() });
            }
        }
        out.push(solve_periodic(&prob)?);
    }
    Ok(out)
}

/// Kind of a detected local extremum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    Min,
    Max,
    Constant,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtremumCheck {
    pub phi: f64,
    pub kind: ExtremumKind,
    pub h: f64,
    pub g: f64,
    pub h_pow: f64,
    pub inequality_holds: bool,
    /// |p(φ₀) − h̄(φ₀)u(φ₀)|, zero when the boundary touches radially.
    pub touching_gap: f64,
    pub touching_holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtremumReport {
    pub checks: Vec<ExtremumCheck>,
    pub all_hold: bool,
    pub violations: usize,
}

/// At local minima of h̄, G(h̄) ≥ h̄^{n−1}; at maxima, G(h̄) ≤ h̄^{n−1};
/// at both, p(φ₀) = h̄(φ₀)u(φ₀). Extrema are located on the nodes and
/// refined by Newton on h̄′.
pub fn local_extremum_inequalities(body: &dyn Body, g: &dyn GFunction, tol: f64) -> Result<ExtremumReport> {
    let l = body.profile();
    let n = body.dim();
    let grid = l.grid();
    let v = l.values();
    let m = grid.len();
    let scale = l.max_value().abs().max(1.0);
    let tol_abs = tol * scale.powi(n as i32 - 1).max(1.0);
    let mut checks = Vec::new();
    let (lo, hi) = (l.min_value(), l.max_value());
    let make = |phi: f64, kind: ExtremumKind, hv: f64| {
        let gv = g.eval(hv);
        let hp = hv.powi(n as i32 - 1);
        let inequality_holds = match kind {
            ExtremumKind::Min => gv >= hp - tol_abs,
            ExtremumKind::Max => gv <= hp + tol_abs,
            ExtremumKind::Constant => (gv - hp).abs() <= tol_abs,
        };
        let p = gauss_preimage(l, phi);
        let gap = (p[0] - hv * phi.cos()).hypot(p[1] - hv * phi.sin());
        ExtremumCheck {
            phi,
            kind,
            h: hv,
            g: gv,
            h_pow: hp,
            inequality_holds,
            touching_gap: gap,
            touching_holds: gap <= tol * scale,
        }
    };
    if hi - lo <= 1e-12 * scale {
        checks.push(make(0.0, ExtremumKind::Constant, v[0]));
    } else {
        for k in 0..m {
            let (a, b, c) = (v[(k + m - 1) % m], v[k], v[(k + 1) % m]);
            let kind = if b > a && b >= c {
                ExtremumKind::Max
            } else if b < a && b <= c {
                ExtremumKind::Min
            } else {
                continue;
            };
            let mut phi = grid.angle(k);
            if !l.is_polygonal() {
                for _ in 0..30 {
                    let (_, d1, d2) = l.eval3(phi);
                    if d2 == 0.0 {
                        break;
                    }
                    let next = phi - d1 / d2;
                    if (next - grid.angle(k)).abs() > grid.step() {
                        break;
                    }
                    if (next - phi).abs() < 1e-15 {
                        phi = next;
                        break;
                    }
                    phi = next;
                }
            }
            checks.push(make(phi, kind, l.eval(phi)));
        }
    }
    let violations = checks.iter().filter(|c| !(c.inequality_holds && c.touching_holds)).count();
    Ok(ExtremumReport { all_hold: violations == 0, violations, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gclass::Preset;

    #[test]
    fn d2_matrix_differentiates_trig_modes() {
        let n = 32;
        let d2 = second_derivative_matrix(n);
        let v = DVector::from_fn(n, |k, _| (3.0 * TAU * k as f64 / n as f64).cos());
        let out = &d2 * &v;
        for k in 0..n {
            assert!((out[k] + 9.0 * v[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn constant_solution_of_power_law() {
        assert!((constant_solution(&Preset::Power(2.0)) - 1.0).abs() < 1e-12);
        assert!((constant_solution(&Preset::Const(0.7)) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn constant_g_gives_translated_circles() {
        let g = Preset::Const(1.0);
        let prob = BvpProblem::new(&g, 11, 7);
        let set = solve_periodic(&prob).unwrap();
        assert!(set
            .solutions
            .iter()
            .all(|s| matches!(s.classification.tag, Tag::CircleCentered | Tag::CircleTranslated)));
        assert!(set.solutions.iter().any(|s| s.classification.tag == Tag::CircleTranslated));
    }

    #[test]
    fn classifier_recovers_ellipse_axes() {
        let g = CircleGrid::new(256).unwrap();
        let e = ProfileSupport::ellipse(g, 1.7, 0.6, 0.3, [0.0, 0.0]).unwrap();
        let c = classify_solution(&e);
        assert_eq!(c.tag, Tag::EllipseFamily);
        assert!((c.semi_axes.0 - 1.7).abs() < 1e-10 && (c.semi_axes.1 - 0.6).abs() < 1e-10);
        assert!((c.ellipse_angle - 0.3).abs() < 1e-10);
    }

    #[test]
    fn classifier_finds_vertical_axis_and_monotone_half() {
        let g = CircleGrid::new(256).unwrap();
        let h = ProfileSupport::from_fn(g, |p| 1.0 + 0.2 * p.sin() + 1e-4 * (3.0 * p).sin()).unwrap();
        let c = classify_solution(&h);
        assert!((c.axis - PI / 2.0).abs() < 1e-12 && c.axis_deviation < 1e-12);
        assert!(c.monotone_in_frame);
        assert_eq!(c.tag, Tag::Other);
    }

    #[test]
    fn spectral_path_matches_dense_path() {
        let g = Preset::Power(-3.0);
        let mut prob = BvpProblem::new(&g, 6, 1);
        let dense = solve_periodic(&prob).unwrap();
        prob.solver = LinearSolver::SpectralGmres;
        let spectral = solve_periodic(&prob).unwrap();
        assert_eq!(dense.solutions.len(), spectral.solutions.len());
        for s in &spectral.solutions {
            let ab = s.classification.semi_axes.0 * s.classification.semi_axes.1;
            assert!((ab - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn rotation_distance_ignores_rotation() {
        let g = CircleGrid::new(128).unwrap();
        let a = ProfileSupport::ellipse(g, 1.5, 1.0, 0.0, [0.0, 0.0]).unwrap();
        let b = ProfileSupport::ellipse(g, 1.5, 1.0, 0.123, [0.0, 0.0]).unwrap();
        assert!(rotation_distance(a.values(), b.values()) < 1e-9);
        let c = ProfileSupport::ellipse(g, 1.6, 1.0, 0.0, [0.0, 0.0]).unwrap();
        assert!(rotation_distance(a.values(), c.values()) > 1e-3);
    }

    #[test]
    fn extremum_inequalities_on_circle_and_non_solution() {
        let g = CircleGrid::new(256).unwrap();
        let d = ProfileSupport::disc(g, 1.0, [0.0, 0.0]).unwrap();
        let r = local_extremum_inequalities(&d, &Preset::Const(1.0), 1e-8).unwrap();
        assert!(r.all_hold && r.checks[0].kind == ExtremumKind::Constant);
        let e = ProfileSupport::ellipse(g, 2.0, 1.0, 0.0, [0.0, 0.0]).unwrap();
        let r = local_extremum_inequalities(&e, &Preset::Const(3.0), 1e-8).unwrap();
        assert!(!r.all_hold && r.violations >= 2);
        assert!(r.checks.iter().all(|c| c.touching_holds));
    }
}

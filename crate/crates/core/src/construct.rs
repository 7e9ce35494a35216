//! Gluing of convex bodies along tangency points, central symmetrization of
//! bodies of revolution, spherical caps, and the translated-bump
//! counterexample with its verification.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{FireyError, Result};
use crate::gclass::{check_an, glue_g_eps, AnCertificate, GFunction, GTab, GluedG, DEFAULT_SAMPLES};
use crate::geometry_core::body::{AxisymBody, Body, ProfileSupport};
use crate::geometry_core::centroid::barycentre;
use crate::geometry_core::duality::gauss_preimage;
use crate::geometry_core::grid::{sphere_area, CircleGrid};
use crate::geometry_core::polygon::{dot, Vec2};
use crate::measure_calculus::{
    density_axisym_with, monge_ampere_residual, DiffMode, ResidualOptions, ResidualReport, SeamBand,
};

/// Tolerance for "p lies on the boundary", relative to max h̄.
pub const BOUNDARY_TOL: f64 = 1e-6;
/// Tolerance on the angle between normals at a tangency point (radians).
pub const TANGENT_TOL: f64 = 1e-6;

/// Outer normal angle at a boundary point x and the offset
/// max_u(⟨x,u⟩ − h(u)), which vanishes exactly on the boundary.
fn normal_at(l: &ProfileSupport, x: Vec2) -> (f64, f64) {
    let g = l.grid();
    let score = |phi: f64| dot(x, [phi.cos(), phi.sin()]) - l.eval(phi);
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
    for k in 0..g.len() {
        let v = dot(x, g.unit(k)) - l.values()[k];
        if v > best {
            best = v;
            arg = k;
        }
    }
    // Golden-section refinement on the bracketing cells.
    let (mut a, mut b) = (g.angle(arg) - g.step(), g.angle(arg) + g.step());
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (score(c), score(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = score(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = score(d);
        }
    }
    let phi = 0.5 * (a + b);
    let val = score(phi).max(best);
    (phi.rem_euclid(TAU), val)
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// True if φ lies on the counter-clockwise arc from `from` to `to`.
fn on_ccw_arc(phi: f64, from: f64, to: f64) -> bool {
    let span = (to - from).rem_euclid(TAU);
    (phi - from).rem_euclid(TAU) <= span
}

/// Glues T₁ and T₂ along the chord through p and q, where both bodies pass
/// through p and q with a common tangent. T₁ contributes the boundary arc
/// from q to p in counter-clockwise order, T₂ the rest.
pub fn tangency_glue(t1: &ProfileSupport, t2: &ProfileSupport, p: Vec2, q: Vec2) -> Result<ProfileSupport> {
    if t1.grid().len() != t2.grid().len() {
        return Err(FireyError::GridMismatch { left: t1.grid().len(), right: t2.grid().len() });
    }
    let scale = t1.max_value().abs().max(t2.max_value().abs()).max(1.0);
    let mut normals = [[0.0; 2]; 2];
    for (i, x) in [p, q].into_iter().enumerate() {
        for (b, body) in [t1, t2].into_iter().enumerate() {
            let (phi, off) = normal_at(body, x);
            if off.abs() > BOUNDARY_TOL * scale {
                return Err(FireyError::BoundaryNotFound { point: x, body: b + 1, offset: off });
            }
            normals[i][b] = phi;
        }
        let gap = angle_gap(normals[i][0], normals[i][1]);
        if gap > TANGENT_TOL {
            return Err(FireyError::TangentMismatch { point: x, gap });
        }
    }
    let (phi_p, phi_q) = (normals[0][0], normals[1][0]);
    let g = *t1.grid();
    let h = (0..g.len())
        .map(|k| if on_ccw_arc(g.angle(k), phi_q, phi_p) { t1.values()[k] } else { t2.values()[k] })
        .collect();
    ProfileSupport::new(g, h)
}

/// K̄ with h_K̄(v) = h_K(v) for ⟨v,e₂⟩ ≥ 0 and h_K(−v) otherwise; requires
/// p_K(e₁) on the x₁-axis, i.e. h̄′(0) = 0.
pub fn glue_central_symmetric(k: &AxisymBody) -> Result<AxisymBody> {
    let l = k.profile();
    let g = *l.grid();
    let scale = l.max_value().abs().max(1.0);
    let (_, d1, _) = l.eval3(0.0);
    if d1.abs() > BOUNDARY_TOL * scale {
        return Err(FireyError::Precondition(format!("p_K(1,0) must lie on the x1-axis: h'(0) = {d1:.3e}")));
    }
    let n = g.len();
    let h = (0..n).map(|j| if g.sin_at(j) >= 0.0 { l.values()[j] } else { l.values()[g.antipode_index(j)] }).collect();
    AxisymBody::new(k.dim(), ProfileSupport::new(g, h)?)
}

/// Inputs of the cap gluing: a profile T, tangency latitudes ν₁ < ν₂ in
/// [0, π/2], and cap radii r₁ < r₂.
#[derive(Clone, Debug)]
pub struct GlueSpec {
    pub profile: ProfileSupport,
    pub nu1: f64,
    pub nu2: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Output of the cap gluing.
#[derive(Clone, Debug, Serialize)]
pub struct CapGlue {
    #[serde(skip)]
    pub body: AxisymBody,
    pub g_eps: GluedG,
    /// H^{n−1} of U_ε, the directions where h_K̄ lies within ε of r₁ or r₂.
    pub u_eps_measure: f64,
    /// Finite-difference residual with seam bands and U_ε excluded.
    pub residual: ResidualReport,
    pub seams: Vec<f64>,
}

/// Latitude of φ measured from the equator, folded into [0, π/2] on the
/// upper half.
fn latitude(phi: f64) -> f64 {
    phi.sin().asin()
}

/// h of T′: cap r₁ below ν₁, T on the band, cap r₂ above ν₂ (upper half;
/// the lower half is filled by central symmetry).
fn capped_value(spec: &GlueSpec, phi: f64) -> f64 {
    let lat = latitude(phi).abs();
    if lat < spec.nu1 {
        spec.r1
    } else if lat > spec.nu2 {
        spec.r2
    } else {
        spec.profile.eval(phi)
    }
}

/// Caps the band of T between latitudes ν₁ and ν₂ with spheres of radii
/// r₁ and r₂, symmetrizes centrally, and pairs the result with G_ε.
pub fn glue_spherical_caps(spec: &GlueSpec, n: usize, g: &GTab, eps: f64) -> Result<CapGlue> {
    let l = &spec.profile;
    let scale = l.max_value().abs().max(1.0);
    if !(0.0 <= spec.nu1 && spec.nu1 < spec.nu2 && spec.nu2 <= FRAC_PI_2) {
        return Err(FireyError::Precondition(format!(
            "tangency latitudes must satisfy 0 <= nu1 < nu2 <= pi/2, got {} and {}",
            spec.nu1, spec.nu2
        )));
    }
    if !(0.0 < spec.r1 && spec.r1 < spec.r2) {
        return Err(FireyError::Precondition(format!("need 0 < r1 < r2, got {} and {}", spec.r1, spec.r2)));
    }
    for (i, (nu, r)) in [(spec.nu1, spec.r1), (spec.nu2, spec.r2)].into_iter().enumerate() {
        let p = gauss_preimage(l, nu);
        let target = [r * nu.cos(), r * nu.sin()];
        let gap = (p[0] - target[0]).hypot(p[1] - target[1]);
        if gap > BOUNDARY_TOL * scale {
            return Err(FireyError::Precondition(format!(
                "p_T(nu{}) = ({:.6}, {:.6}) is not the cap point r{} nu{} (gap {gap:.3e})",
                i + 1,
                p[0],
                p[1],
                i + 1,
                i + 1
            )));
        }
    }
    let grid = *l.grid();
    for k in 0..grid.len() {
        let phi = grid.angle(k);
        if phi > spec.nu1 && phi < spec.nu2 {
            let v = l.values()[k];
            if !(v > spec.r1 && v < spec.r2) {
                return Err(FireyError::Precondition(format!(
                    "r1 < h_T < r2 fails between the tangency latitudes: h_T({phi:.6}) = {v}"
                )));
            }
        }
    }
    let (a1, a2) = (spec.r1.powi(n as i32 - 1), spec.r2.powi(n as i32 - 1));
    let (g1, g2) = (g.eval(spec.r1), g.eval(spec.r2));
    if g1 < a1 {
        return Err(FireyError::Precondition(format!("cap inequality r1^(n-1) <= G(r1) fails: {a1} > {g1}")));
    }
    if g2 > a2 {
        return Err(FireyError::Precondition(format!("cap inequality r2^(n-1) >= G(r2) fails: {a2} < {g2}")));
    }
    let h: Vec<f64> = (0..grid.len())
        .map(|k| {
            let phi = grid.angle(k);
            let up = if grid.sin_at(k) >= 0.0 { phi } else { phi + PI };
            capped_value(spec, up)
        })
        .collect();
    let body = AxisymBody::new(n, ProfileSupport::new(grid, h)?)?;
    let g_eps = glue_g_eps(&g.with_dimension(n), spec.r1, spec.r2, a1, a2, eps)?;
    // U_ε by midpoint integration of its indicator on a grid 16 times finer;
    // dH = ½|S^{n−2}||cos φ|^{n−2}dφ over the full circle.
    let fine = CircleGrid::new(16 * grid.len())?;
    let in_u = |v: f64| (v > spec.r1 && v < spec.r1 + eps) || (v > spec.r2 - eps && v < spec.r2);
    let unit_weight = 0.5 * sphere_area(n - 2) * fine.step();
    let u_eps_measure: f64 = (0..fine.len())
        .filter(|&k| {
            let phi = fine.angle(k);
            let up = if fine.sin_at(k) >= 0.0 { phi } else { phi + PI };
            in_u(capped_value(spec, up))
        })
        .map(|k| unit_weight * fine.cos_at(k).abs().powi(n as i32 - 2))
        .sum();
    let mut seams = Vec::new();
    for nu in [spec.nu1, spec.nu2] {
        for a in [nu, PI - nu, PI + nu, TAU - nu] {
            seams.push(a.rem_euclid(TAU));
        }
    }
    let exclude = body.profile().values().iter().map(|&v| in_u(v)).collect();
    let opts = ResidualOptions {
        mode: DiffMode::FiniteDifference,
        seams: Some(SeamBand { angles: seams.clone(), half_width: 2 }),
        exclude: Some(exclude),
    };
    let residual = monge_ampere_residual(&body, &g_eps.g, &opts)?;
    Ok(CapGlue { body, g_eps, u_eps_measure, residual, seams })
}

/// A band profile h = P(sin φ) on latitudes [asin s₁, π/2] with
/// P(s) = r₀ + δ(s − s₁)⁴, capped by r₀ below, together with the G that
/// makes the band exact, G(θ) = f(P⁻¹(θ)). The quartic contact keeps the
/// profile C³ across the seam.
#[derive(Clone, Debug)]
pub struct SyntheticCaps {
    pub spec: GlueSpec,
    pub g: GTab,
}

pub fn synthetic_cap_example(grid: CircleGrid, n: usize) -> Result<SyntheticCaps> {
    let (r0, delta, s1) = (1.0, 1.0, 0.5);
    let p = move |s: f64| {
        let d = (s - s1).max(0.0);
        r0 + delta * d.powi(4)
    };
    let dp = move |s: f64| {
        let d = (s - s1).max(0.0);
        4.0 * delta * d.powi(3)
    };
    let ddp = move |s: f64| {
        let d = (s - s1).max(0.0);
        12.0 * delta * d * d
    };
    // Density of h = P(sin φ) as a function of s.
    let f = move |s: f64| {
        let a = ddp(s) * (1.0 - s * s) - dp(s) * s + p(s);
        a * (p(s) - s * dp(s)).powi(n as i32 - 2)
    };
    let profile = ProfileSupport::from_fn(grid, |phi| p(phi.sin().abs()))?;
    let (r1, r2) = (r0, p(1.0));
    let g = GTab::from_fn(n, r1, r2, DEFAULT_SAMPLES, |theta| {
        let (mut lo, mut hi) = (s1, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p(mid) < theta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        f(0.5 * (lo + hi))
    })?;
    let spec = GlueSpec { profile, nu1: s1.asin(), nu2: FRAC_PI_2, r1, r2 };
    Ok(SyntheticCaps { spec, g })
}

/// The even bump g(s) = exp(1 − 1/(1 − 4s²)) on (−1/2, 1/2), amplitude 1,
/// with its first three derivatives.
pub fn bump(s: f64) -> [f64; 4] {
    let q = 1.0 - 4.0 * s * s;
    if q <= 0.0 || 1.0 / q > 700.0 {
        return [0.0; 4];
    }
    let g = (1.0 - 1.0 / q).exp();
    let (q2, q3, q4) = (q * q, q * q * q, q * q * q * q);
    let p1 = -8.0 * s / q2;
    let p2 = -8.0 / q2 - 128.0 * s * s / q3;
    let p3 = -384.0 * s / q3 - 3072.0 * s * s * s / q4;
    [g, g * p1, g * (p1 * p1 + p2), g * (p1 * p1 * p1 + 3.0 * p1 * p2 + p3)]
}

/// Analytic data of K_m: support r + g(s)/m in s = sin φ.
#[derive(Clone, Copy, Debug)]
struct BumpBody {
    n: usize,
    r: f64,
    lambda: f64,
    m: f64,
}

impl BumpBody {
    /// (h″ + h, (h cos φ − h′ sin φ)/cos φ) as functions of s.
    fn radii(&self, s: f64) -> (f64, f64) {
        let [g, g1, g2, _] = bump(s);
        let a = self.r + (g + g2 * (1.0 - s * s) - g1 * s) / self.m;
        let b = self.r + (g - s * g1) / self.m;
        (a, b)
    }

    fn density(&self, s: f64) -> f64 {
        let (a, b) = self.radii(s);
        a * b.powi(self.n as i32 - 2)
    }

    fn density_deriv(&self, s: f64) -> f64 {
        let [_, _, g2, g3] = bump(s);
        let (a, b) = self.radii(s);
        let da = (g3 * (1.0 - s * s) - 3.0 * s * g2) / self.m;
        let db = -s * g2 / self.m;
        let k = self.n as i32 - 2;
        let tail = if k > 0 { k as f64 * a * b.powi(k - 1) * db } else { 0.0 };
        da * b.powi(k) + tail
    }

    /// Shifted profile P(s) = r + g(s)/m + λs and P′(s).
    fn shifted(&self, s: f64) -> (f64, f64) {
        let [g, g1, _, _] = bump(s);
        (self.r + g / self.m + self.lambda * s, self.lambda + g1 / self.m)
    }

    /// Minimum over s of the curvature radii and of P′, on a fine grid.
    fn margins(&self) -> (f64, f64) {
        let mut conv = f64::INFINITY;
        let mut mono = f64::INFINITY;
        for i in 0..=20000 {
            let s = -1.0 + 2.0 * i as f64 / 20000.0;
            let (a, b) = self.radii(s);
            conv = conv.min(a).min(b);
            mono = mono.min(self.shifted(s).1);
        }
        (conv, mono)
    }

    fn inverse(&self, theta: f64) -> f64 {
        let (mut lo, mut hi) = (-1.0, 1.0);
        let mut s = (theta - self.r) / self.lambda;
        s = s.clamp(-1.0, 1.0);
        for _ in 0..100 {
            let (p, dp) = self.shifted(s);
            let f = p - theta;
            if f < 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let mut next = s - f / dp;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() < 1e-16 || hi - lo < 1e-16 {
                s = next;
                break;
            }
            s = next;
        }
        s
    }

    fn g_table(&self) -> Result<GTab> {
        let (c1, c2) = (self.r - self.lambda, self.r + self.lambda);
        GTab::from_fn_with_deriv(
            self.n,
            c1,
            c2,
            DEFAULT_SAMPLES,
            |t| self.density(self.inverse(t)),
            |t| {
                let s = self.inverse(t);
                self.density_deriv(s) / self.shifted(s).1
            },
        )
    }
}

/// Grid used for the counterexample bodies.
pub const COUNTEREXAMPLE_GRID: usize = 4096;

/// Certificates recorded while building K_m.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuildCertificates {
    /// min over s of the two principal radii (must exceed 1e-8·r).
    pub convexity_margin: f64,
    /// min over s of λ + g′(s)/m (must exceed 1e-8·r).
    pub monotonicity_margin: f64,
    pub an: AnCertificate,
}

/// K_m with support r + g(⟨v,e₂⟩)/m, its translate K_m + λe₂ and
/// G_m(θ) = f_{K_m}(ζ_m(θ)).
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub n: usize,
    pub r: f64,
    pub lambda: f64,
    pub m: f64,
    pub body: AxisymBody,
    pub shifted: AxisymBody,
    pub g_m: GTab,
    pub certificates: BuildCertificates,
    /// m values tried by the automatic search.
    pub search: Vec<f64>,
}

fn certify(bb: &BumpBody) -> Result<(GTab, BuildCertificates, bool)> {
    let (conv, mono) = bb.margins();
    let margin = 1e-8 * bb.r;
    if !(conv > margin && mono > margin) {
        let an = AnCertificate {
            n: bb.n,
            pass: false,
            min_forward_diff: f64::NAN,
            min_window_increase: f64::NAN,
            sufficient_min: f64::NAN,
            violation: None,
        };
        let dummy = GTab::from_samples(bb.n, bb.r - bb.lambda, bb.r + bb.lambda, vec![1.0, 1.0])?;
        return Ok((dummy, BuildCertificates { convexity_margin: conv, monotonicity_margin: mono, an }, false));
    }
    let g = bb.g_table()?;
    let an = check_an(&g);
    let ok = an.pass && an.sufficient_min > 0.0;
    Ok((g, BuildCertificates { convexity_margin: conv, monotonicity_margin: mono, an }, ok))
}

/// Lower bound on m from the convexity and monotonicity conditions.
fn minimal_m_estimate(r: f64, lambda: f64) -> f64 {
    let mut need: f64 = 0.0;
    for i in 0..=20000 {
        let s = -0.5 + i as f64 / 20000.0;
        let [g, g1, g2, _] = bump(s);
        need = need.max(-(g + g2 * (1.0 - s * s) - g1 * s) / r);
        need = need.max(-(g - s * g1) / r);
        need = need.max(-g1 / lambda);
    }
    need
}

/// Builds the counterexample. With `m = None` the scale doubles from 1
/// until convexity, monotonicity and the class certificate all pass.
pub fn build_counterexample(n: usize, r: f64, lambda: f64, m: Option<f64>) -> Result<Counterexample> {
    if !(lambda > 0.0 && r > 2.0 * lambda) {
        return Err(FireyError::Precondition(format!("need r > 2*lambda > 0, got r = {r}, lambda = {lambda}")));
    }
    if !(2..=16).contains(&n) {
        return Err(FireyError::InvalidInput(format!("dimension {n} outside 2..=16")));
    }
    let mut search = Vec::new();
    let (m, g_m, certificates) = match m {
        Some(m) => {
            if !(m > 0.0) {
                return Err(FireyError::InvalidInput("m must be positive".into()));
            }
            let bb = BumpBody { n, r, lambda, m };
            let (g, c, _) = certify(&bb)?;
            let margin = 1e-8 * r;
            if !(c.convexity_margin > margin && c.monotonicity_margin > margin) {
                return Err(FireyError::Precondition(format!(
                    "m = {m} too small: convexity margin {:.3e}, monotonicity margin {:.3e}; minimal admissible m is about {:.4}",
                    c.convexity_margin,
                    c.monotonicity_margin,
                    minimal_m_estimate(r, lambda)
                )));
            }
            search.push(m);
            (m, g, c)
        }
        None => {
            let mut m = 1.0;
            loop {
                search.push(m);
                let bb = BumpBody { n, r, lambda, m };
                let (g, c, ok) = certify(&bb)?;
                if ok {
                    break (m, g, c);
                }
                m *= 2.0;
                if m > 2f64.powi(30) {
                    return Err(FireyError::NonConvergence {
                        what: "counterexample scale search".into(),
                        detail: "no m up to 2^30 passes every certificate".into(),
                        trace: search,
                    });
                }
            }
        }
    };
    let grid = CircleGrid::new(COUNTEREXAMPLE_GRID)?;
    let base = ProfileSupport::from_fn(grid, |phi| r + bump(phi.sin())[0] / m)?;
    let body = AxisymBody::new(n, base)?;
    let shifted = body.translated_axis(lambda);
    Ok(Counterexample { n, r, lambda, m, body, shifted, g_m, certificates, search })
}

/// Outcome of the end-to-end checks on a counterexample.
#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub n: usize,
    pub m: f64,
    pub residual: ResidualReport,
    pub an: AnCertificate,
    /// min θG′ + (n+1)G over the table nodes.
    pub sufficient_min: f64,
    /// Sup deviation of the shifted profile from its best translated ball.
    pub non_sphericity: f64,
    /// max |h(φ) − h(φ + π)| of K_m.
    pub central_symmetry: f64,
    pub barycentre: Vec2,
    /// max |f_{K_m} − f_{K_m + λe₂}|.
    pub translation_identity: f64,
    /// sup |G_m − r^{n−1}|.
    pub deviation_from_constant: f64,
    /// Density of K_m on |sin φ| > 1/2, compared with r and r^{n−1}.
    pub outer_density: f64,
    pub outer_matches: String,
    /// Interval of θ around an interior strict extremum of G_m.
    pub witness: Option<(f64, f64, String)>,
}

/// Sup residual of a least-squares fit by span{1, cos, sin}.
pub fn ball_fit_deviation(l: &ProfileSupport) -> f64 {
    let (a0, (a1, b1)) = (l.interp().mean(), l.interp().first_harmonic());
    let g = l.grid();
    (0..g.len()).map(|k| (l.values()[k] - a0 - a1 * g.cos_at(k) - b1 * g.sin_at(k)).abs()).fold(0.0, f64::max)
}

pub fn verify_counterexample(c: &Counterexample) -> Result<CounterexampleReport> {
    let residual = monge_ampere_residual(&c.shifted, &c.g_m, &ResidualOptions::default())?;
    let an = check_an(&c.g_m);
    let sufficient_min = an.sufficient_min;
    let non_sphericity = ball_fit_deviation(c.shifted.profile());
    let l = c.body.profile();
    let g = l.grid();
    let central_symmetry =
        (0..g.len()).map(|k| (l.values()[k] - l.values()[g.antipode_index(k)]).abs()).fold(0.0, f64::max);
    let barycentre = barycentre(&c.shifted)?;
    let f0 = density_axisym_with(&c.body, DiffMode::Spectral)?;
    let f1 = density_axisym_with(&c.shifted, DiffMode::Spectral)?;
    let translation_identity = f0.f.iter().zip(&f1.f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let target = c.r.powi(c.n as i32 - 1);
    let deviation_from_constant = c.g_m.samples().iter().map(|v| (v - target).abs()).fold(0.0, f64::max);
    let mut outer = 0.0f64;
    let mut count = 0;
    for k in 0..g.len() {
        if g.sin_at(k).abs() > 0.55 {
            outer += f0.f[k];
            count += 1;
        }
    }
    let outer_density = outer / count as f64;
    let outer_matches = if (outer_density - target).abs() < 1e-8 {
        if c.n == 2 || (c.r - 1.0).abs() < 1e-12 {
            "r^(n-1) (equal to r here)".to_string()
        } else {
            "r^(n-1)".to_string()
        }
    } else if (outer_density - c.r).abs() < 1e-8 {
        "r".to_string()
    } else {
        "neither".to_string()
    };
    let witness = extremum_witness(&c.g_m);
    Ok(CounterexampleReport {
        n: c.n,
        m: c.m,
        residual,
        an,
        sufficient_min,
        non_sphericity,
        central_symmetry,
        barycentre,
        translation_identity,
        deviation_from_constant,
        outer_density,
        outer_matches,
        witness,
    })
}

/// First interior strict local extremum of the table, with the interval on
/// which it dominates its neighbours.
fn extremum_witness(g: &GTab) -> Option<(f64, f64, String)> {
    let s = g.samples();
    let m = s.len();
    let scale = g.max_sample().abs();
    for k in 1..m - 1 {
        let (a, b, c) = (s[k - 1], s[k], s[k + 1]);
        let kind = if b > a && b >= c {
            "max"
        } else if b < a && b <= c {
            "min"
        } else {
            continue;
        };
        // Require a genuine bump: the value must stand out from the table ends.
        let prominent = (b - s[0]).abs().min((b - s[m - 1]).abs()) > 1e-9 * scale;
        if !prominent {
            continue;
        }
        let mut lo = k;
        while lo > 0 && ((kind == "max" && s[lo - 1] < s[lo]) || (kind == "min" && s[lo - 1] > s[lo])) {
            lo -= 1;
        }
        let mut hi = k;
        while hi + 1 < m && ((kind == "max" && s[hi + 1] < s[hi]) || (kind == "min" && s[hi + 1] > s[hi])) {
            hi += 1;
        }
        return Some((g.theta(lo), g.theta(hi), format!("strict local {kind} at {}", g.theta(k))));
    }
    None
}

/// sup |G_m − r^{n−1}| along m, 2m, 4m, … (`steps` values).
pub fn uniform_convergence_sweep(n: usize, r: f64, lambda: f64, m0: f64, steps: usize) -> Result<Vec<(f64, f64, f64)>> {
    let target = r.powi(n as i32 - 1);
    (0..steps)
        .map(|i| {
            let m = m0 * 2f64.powi(i as i32);
            let bb = BumpBody { n, r, lambda, m };
            let g = bb.g_table()?;
            let dev = g.samples().iter().map(|v| (v - target).abs()).fold(0.0, f64::max);
            let dmax = g.slopes().iter().map(|v| v.abs()).fold(0.0, f64::max);
            Ok((m, dev, dmax))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gclass::Preset;

    #[test]
    fn bump_derivatives_match_finite_differences() {
        for &s in &[-0.3, -0.1, 0.0, 0.2, 0.41] {
            let d = 1e-5;
            for j in 0..3 {
                let fd = (bump(s + d)[j] - bump(s - d)[j]) / (2.0 * d);
                let v = bump(s)[j + 1];
                assert!((fd - v).abs() < 1e-5 * (1.0 + v.abs()), "order {} at {s}: {fd} vs {v}", j + 1);
            }
        }
        assert_eq!(bump(0.0)[0], 1.0);
        assert_eq!(bump(0.5), [0.0; 4]);
    }

    #[test]
    fn identical_discs_glue_to_disc() {
        let g = CircleGrid::new(512).unwrap();
        let d = ProfileSupport::disc(g, 1.0, [0.0, 0.0]).unwrap();
        let out = tangency_glue(&d, &d, [1.0, 0.0], [-1.0, 0.0]).unwrap();
        assert_eq!(out.values(), d.values());
    }

    #[test]
    fn disc_and_ellipse_share_tangents() {
        let g = CircleGrid::new(1024).unwrap();
        let d = ProfileSupport::disc(g, 1.0, [0.0, 0.0]).unwrap();
        let e = ProfileSupport::ellipse(g, 1.0, 0.5, 0.0, [0.0, 0.0]).unwrap();
        let out = tangency_glue(&d, &e, [1.0, 0.0], [-1.0, 0.0]).unwrap();
        // lower half from the disc, upper half from the ellipse
        assert!((out.eval(-FRAC_PI_2) - 1.0).abs() < 1e-12);
        assert!((out.values()[256] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mismatched_tangent_is_rejected() {
        let g = CircleGrid::new(1024).unwrap();
        let d = ProfileSupport::disc(g, 1.0, [0.0, 0.0]).unwrap();
        let e = ProfileSupport::ellipse(g, 1.2, 0.7, 0.4, [0.0, 0.0]).unwrap();
        // a common boundary point of the two curves with distinct normals
        let (mut lo, mut hi) = (0.4, 0.4 + FRAC_PI_2);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let x = gauss_preimage(&d, mid);
            if normal_at(&e, x).1 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = gauss_preimage(&d, 0.5 * (lo + hi));
        let err = tangency_glue(&d, &e, p, [-1.0, 0.0]).unwrap_err();
        assert_eq!(err.kind(), "tangent_mismatch");
        let err = tangency_glue(&d, &e, [0.0, 0.0], [-1.0, 0.0]).unwrap_err();
        assert_eq!(err.kind(), "boundary_not_found");
    }

    #[test]
    fn central_glue_is_idempotent_and_needs_axis_point() {
        let g = CircleGrid::new(512).unwrap();
        let b = AxisymBody::ball(g, 3, 1.0, 0.0).unwrap();
        let once = glue_central_symmetric(&b).unwrap();
        assert_eq!(once.profile().values(), b.profile().values());
        let twice = glue_central_symmetric(&once).unwrap();
        assert_eq!(twice.profile().values(), once.profile().values());
        assert!(glue_central_symmetric(&b.translated_axis(0.2)).is_err());
    }

    #[test]
    fn ball_between_radii_is_rejected_by_caps() {
        let g = CircleGrid::new(512).unwrap();
        let spec = GlueSpec {
            profile: ProfileSupport::disc(g, 1.2, [0.0, 0.0]).unwrap(),
            nu1: 0.3,
            nu2: 1.2,
            r1: 1.0,
            r2: 1.5,
        };
        let tab = Preset::Const(1.2).tabulate(3, 0.5, 2.0, 1024).unwrap();
        assert!(glue_spherical_caps(&spec, 3, &tab, 0.05).is_err());
    }

    #[test]
    fn trivial_bump_gives_ball() {
        let bb = BumpBody { n: 3, r: 1.0, lambda: 0.1, m: 1e300 };
        let g = bb.g_table().unwrap();
        assert!(g.samples().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }
}

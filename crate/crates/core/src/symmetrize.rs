//! Steiner symmetrization as a shadow system, the Santaló point, polar-volume
//! convexity probes and the left derivative h′_L of the polar shadow family.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FireyError, Result};
use crate::gclass::GFunction;
use crate::geometry_core::body::ProfileSupport;
use crate::geometry_core::centroid::barycentre;
use crate::geometry_core::duality::gauss_preimage;
use crate::geometry_core::grid::CircleGrid;
use crate::geometry_core::polygon::{dot, Polygon, Vec2};
use crate::geometry_core::spectral::spectral_derivative;

/// Boundary points used to realize a smooth body as a polygon.
pub const BOUNDARY_SAMPLES: usize = 4096;

/// Deepest rung j used when a ladder has to be extended.
pub const EXTENDED_RUNG: i32 = 24;
/// Agreement of successive rungs that ends an extended ladder.
pub const SETTLE_TOL: f64 = 1e-7;
/// Exponents j of the ladder t = 1 − 2^{−j} used for h′_L.
pub const LADDER: std::ops::RangeInclusive<i32> = 6..=14;

/// Dense boundary polygon of a body: its own outline when polygonal,
/// otherwise `m` Gauss-map preimages spaced with node density ∝ R^{2/3}
/// in the normal angle (R the radius of curvature), which equidistributes
/// the area defect of the inscribed polygon.
pub fn boundary_polygon(l: &ProfileSupport, m: usize) -> Result<Polygon> {
    if let Some(p) = l.outline() {
        return Ok(p.clone());
    }
    let g = l.grid();
    let n = g.len();
    let h = l.values();
    let h2 = spectral_derivative(h, 2);
    let radius: Vec<f64> = h.iter().zip(&h2).map(|(a, b)| a + b).collect();
    let mean = radius.iter().sum::<f64>() / n as f64;
    let floor = 1e-3 * mean.abs().max(f64::MIN_POSITIVE);
    let dens: Vec<f64> = radius.iter().map(|r| r.max(floor).powf(2.0 / 3.0)).collect();
    let step = g.step();
    let mut cum = vec![0.0; n + 1];
    for k in 0..n {
        cum[k + 1] = cum[k] + 0.5 * step * (dens[k] + dens[(k + 1) % n]);
    }
    let total = cum[n];
    let mut pts = Vec::with_capacity(m);
    let mut seg = 0;
    for j in 0..m {
        let target = total * j as f64 / m as f64;
        while seg + 1 < n && cum[seg + 1] < target {
            seg += 1;
        }
        let span = cum[seg + 1] - cum[seg];
        let frac = if span > 0.0 { (target - cum[seg]) / span } else { 0.0 };
        let phi = step * (seg as f64 + frac);
        pts.push(gauss_preimage(l, phi));
    }
    Polygon::hull(&pts)
}

fn perp(e: Vec2) -> Vec2 {
    [e[1], -e[0]]
}

fn unit(e: Vec2) -> Result<Vec2> {
    let r = e[0].hypot(e[1]);
    if !(r.is_finite() && r > 0.0) {
        return Err(FireyError::InvalidInput("direction must be a nonzero vector".into()));
    }
    Ok([e[0] / r, e[1] / r])
}

/// Piecewise-linear chain y(x̄) with nondecreasing abscissae.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct Chain {
    pts: Vec<Vec2>,
}

impl Chain {
    /// Value at x̄; at a repeated abscissa (vertical edge) the lower or upper
    /// extreme is taken.
    fn eval(&self, x: f64, lower: bool) -> f64 {
        let p = &self.pts;
        let pick = |a: f64, b: f64| if lower { a.min(b) } else { a.max(b) };
        let i = p.partition_point(|q| q[0] < x);
        if i >= p.len() {
            return p.last().unwrap()[1];
        }
        if p[i][0] == x {
            let mut v = p[i][1];
            let mut j = i + 1;
            while j < p.len() && p[j][0] == x {
                v = pick(v, p[j][1]);
                j += 1;
            }
            return v;
        }
        if i == 0 {
            return p[0][1];
        }
        let (a, b) = (p[i - 1], p[i]);
        a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0])
    }
}

/// One-parameter Steiner shadow system {L_t}, t ∈ [−1, 1], of a planar body:
/// L_t = {x − (1−t)u(x̄)e : x ∈ St_e L} with u = (z + w)/2 the chord midline.
///
/// Coordinates are x̄ = ⟨x, e⊥⟩ and y = ⟨x, e⟩ with e⊥ = (e₂, −e₁), an
/// orientation-preserving frame.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShadowFamily {
    grid: CircleGrid,
    e: Vec2,
    /// Merged breakpoints of both chains.
    pub xbar: Vec<f64>,
    /// Lower chord end z(x̄) (convex).
    pub z: Vec<f64>,
    /// Upper chord end w(x̄) (concave).
    pub w: Vec<f64>,
}

impl ShadowFamily {
    pub fn new(l: &ProfileSupport, e: Vec2) -> Result<Self> {
        let poly = boundary_polygon(l, BOUNDARY_SAMPLES)?;
        Self::from_polygon(*l.grid(), &poly, e)
    }

    pub fn from_polygon(grid: CircleGrid, poly: &Polygon, e: Vec2) -> Result<Self> {
        let e = unit(e)?;
        let ep = perp(e);
        let q: Vec<Vec2> = poly.vertices().iter().map(|&p| [dot(p, ep), dot(p, e)]).collect();
        let m = q.len();
        let lex_lo = |a: &Vec2, b: &Vec2| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]));
        let imin = (0..m).min_by(|&i, &j| lex_lo(&q[i], &q[j])).unwrap();
        let imax = (0..m).max_by(|&i, &j| q[i][0].total_cmp(&q[j][0]).then(q[j][1].total_cmp(&q[i][1]))).unwrap();
        let mut lower = Vec::new();
        let mut i = imin;
        loop {
            lower.push(q[i]);
            if i == imax {
                break;
            }
            i = (i + 1) % m;
        }
        let mut upper = Vec::new();
        let mut i = imax;
        loop {
            upper.push(q[i]);
            if i == imin {
                break;
            }
            i = (i + 1) % m;
        }
        upper.reverse();
        let lower = Chain { pts: lower };
        let upper = Chain { pts: upper };
        let mut xbar: Vec<f64> = lower.pts.iter().chain(&upper.pts).map(|p| p[0]).collect();
        xbar.sort_by(f64::total_cmp);
        xbar.dedup();
        let z: Vec<f64> = xbar.iter().map(|&x| lower.eval(x, true)).collect();
        let w: Vec<f64> = xbar.iter().map(|&x| upper.eval(x, false)).collect();
        Ok(Self { grid, e, xbar, z, w })
    }

    pub fn direction(&self) -> Vec2 {
        self.e
    }

    pub fn grid(&self) -> &CircleGrid {
        &self.grid
    }

    /// Midline u(x̄) at the breakpoints.
    pub fn midline(&self) -> Vec<f64> {
        self.z.iter().zip(&self.w).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Chord [z, w] at an arbitrary x̄, `None` outside the projection.
    pub fn chord(&self, x: f64) -> Option<(f64, f64)> {
        let (lo, hi) = (self.xbar[0], *self.xbar.last().unwrap());
        if x < lo || x > hi {
            return None;
        }
        let i = self.xbar.partition_point(|&v| v < x);
        if i < self.xbar.len() && self.xbar[i] == x {
            return Some((self.z[i], self.w[i]));
        }
        let s = (x - self.xbar[i - 1]) / (self.xbar[i] - self.xbar[i - 1]);
        let lerp = |v: &[f64]| v[i - 1] + s * (v[i] - v[i - 1]);
        Some((lerp(&self.z), lerp(&self.w)))
    }

    fn check_t(t: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&t) {
            return Err(FireyError::InvalidInput(format!("shadow parameter t = {t} outside [-1, 1]")));
        }
        Ok(())
    }

    /// Exact polygon L_t: the sheared breakpoints span it because u is
    /// linear between them.
    pub fn polygon_at(&self, t: f64) -> Result<Polygon> {
        Self::check_t(t)?;
        let (e, ep) = (self.e, perp(self.e));
        let s = 1.0 - t;
        let mut pts = Vec::with_capacity(2 * self.xbar.len());
        for k in 0..self.xbar.len() {
            let u = 0.5 * (self.z[k] + self.w[k]);
            for y in [self.z[k] - s * u, self.w[k] - s * u] {
                let x = self.xbar[k];
                pts.push([x * ep[0] + y * e[0], x * ep[1] + y * e[1]]);
            }
        }
        Polygon::hull(&pts)
    }

    /// Radial function of L_t in the unit direction v, by bisection on the
    /// ray against the chord representation (no hull rebuild).
    pub fn radial_at(&self, t: f64, v: Vec2) -> Result<f64> {
        Self::check_t(t)?;
        let s = 1.0 - t;
        let (a, b) = (dot(v, perp(self.e)), dot(v, self.e));
        let inside = |r: f64| {
            self.chord(r * a).is_some_and(|(z, w)| {
                let u = 0.5 * (z + w);
                let y = r * b;
                z - s * u <= y && y <= w - s * u
            })
        };
        if !inside(0.0) {
            return Err(FireyError::OriginNotInterior { node: 0, value: 0.0 });
        }
        let reach = self
            .xbar
            .iter()
            .zip(self.z.iter().zip(&self.w))
            .map(|(x, (z, w))| x.hypot(z.abs().max(w.abs())))
            .fold(0.0, f64::max);
        let (mut lo, mut hi) = (0.0, 4.0 * reach + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    pub fn shadow_body(&self, t: f64) -> Result<ProfileSupport> {
        ProfileSupport::from_polygon(self.grid, self.polygon_at(t)?)
    }
}

/// Support function of L_t on the grid of L.
pub fn shadow_body(l: &ProfileSupport, e: Vec2, t: f64) -> Result<ProfileSupport> {
    ShadowFamily::new(l, e)?.shadow_body(t)
}

/// St_e L, symmetric across e⊥ and of the same area.
pub fn steiner_symmetral(l: &ProfileSupport, e: Vec2) -> Result<ProfileSupport> {
    shadow_body(l, e, 0.0)
}

/// Area of (L − z)° with gradient and Hessian in z. Exact for polygons,
/// spectral quadrature of ½∫(h − ⟨z,u⟩)^{−2}dφ otherwise.
pub fn polar_area_derivatives(l: &ProfileSupport, z: Vec2) -> Result<(f64, Vec2, [[f64; 2]; 2])> {
    if let Some(p) = l.outline() {
        return p.polar_area_derivatives(z);
    }
    let g = l.grid();
    let step = g.step();
    let mut a = 0.0;
    let mut gr = [0.0; 2];
    let mut he = [[0.0; 2]; 2];
    for (k, &h) in l.values().iter().enumerate() {
        let u = g.unit(k);
        let d = h - dot(z, u);
        if d <= 0.0 {
            return Err(FireyError::OriginNotInterior { node: k, value: d });
        }
        let (d2, d3, d4) = (d.powi(-2), d.powi(-3), d.powi(-4));
        a += 0.5 * step * d2;
        for r in 0..2 {
            gr[r] += step * d3 * u[r];
            for c in 0..2 {
                he[r][c] += 3.0 * step * d4 * u[r] * u[c];
            }
        }
    }
    Ok((a, gr, he))
}

/// Minimizer of the polar area and its diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SantaloReport {
    pub point: Vec2,
    pub polar_area: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// |b((L − s)°)| = |∇A|/(3A).
    pub polar_barycentre_offset: f64,
}

pub const SANTALO_GRAD_TOL: f64 = 1e-10;

/// Damped Newton on the strictly convex map z ↦ V((L − z)°), started at the
/// barycentre.
pub fn santalo_point(l: &ProfileSupport) -> Result<SantaloReport> {
    let mut z = barycentre(l)?;
    let mut trace = Vec::new();
    let (mut a, mut g, mut h) = polar_area_derivatives(l, z)?;
    let scale = l.max_value().abs().max(1e-300);
    for it in 0..100 {
        let gn = g[0].hypot(g[1]);
        trace.push(gn);
        if gn <= SANTALO_GRAD_TOL {
            return Ok(SantaloReport {
                point: z,
                polar_area: a,
                grad_norm: gn,
                iterations: it,
                polar_barycentre_offset: gn / (3.0 * a),
            });
        }
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let mut d = if det > 0.0 && h[0][0] > 0.0 {
            [-(h[1][1] * g[0] - h[0][1] * g[1]) / det, -(-h[1][0] * g[0] + h[0][0] * g[1]) / det]
        } else {
            let s = 0.1 * scale / gn;
            [-s * g[0], -s * g[1]]
        };
        if d[0].hypot(d[1]) <= 1e-15 * scale {
            // Rounding floor: the gradient cannot be reduced further.
            return Ok(SantaloReport {
                point: z,
                polar_area: a,
                grad_norm: gn,
                iterations: it,
                polar_barycentre_offset: gn / (3.0 * a),
            });
        }
        let slope = g[0] * d[0] + g[1] * d[1];
        let mut alpha = 1.0;
        loop {
            let cand = [z[0] + alpha * d[0], z[1] + alpha * d[1]];
            if let Ok((na, ng, nh)) = polar_area_derivatives(l, cand) {
                // Near the minimum the area change drowns in rounding, so a
                // shrinking gradient is accepted as progress.
                if na <= a + 1e-4 * alpha * slope || (na <= a + 1e-13 * a.abs() && ng[0].hypot(ng[1]) < gn) {
                    z = cand;
                    a = na;
                    g = ng;
                    h = nh;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                // Accept the tiny step only if the gradient still shrinks.
                d = [0.0, 0.0];
                break;
            }
        }
        if d == [0.0, 0.0] {
            return Err(FireyError::NonConvergence {
                what: "santalo point".into(),
                detail: format!("line search failed at iteration {it} with gradient norm {gn:.3e}"),
                trace,
            });
        }
    }
    Err(FireyError::NonConvergence { what: "santalo point".into(), detail: "iteration limit reached".into(), trace })
}

/// Polar area of L about its Santaló point.
pub fn santalo_polar_area(l: &ProfileSupport) -> Result<f64> {
    Ok(santalo_point(l)?.polar_area)
}

/// Values along the shadow system and their discrete second differences.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexityRow {
    pub t: f64,
    /// 1/V((L_t)*) with * the polar about the Santaló point.
    pub inv_santalo: f64,
    /// 1/V((L_t)° ∩ {⟨x,e⟩ ≥ 0}).
    pub inv_half_plus: f64,
    /// 1/V((L_t)° ∩ {⟨x,e⟩ ≤ 0}).
    pub inv_half_minus: f64,
    /// Second differences at this t (zero at the two ends).
    pub second_diff: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub direction: Vec2,
    pub rows: Vec<ConvexityRow>,
    /// Minimum second difference for each of the three sequences.
    pub min_second_diff: [f64; 3],
}

/// Second differences scaled to the mean step, equal to
/// v_{i+1} − 2v_i + v_{i−1} on a uniform ladder.
fn second_differences(t: &[f64], v: &[f64]) -> Vec<f64> {
    let m = t.len();
    let mut out = vec![0.0; m];
    if m < 3 {
        return out;
    }
    let hbar = (t[m - 1] - t[0]) / (m - 1) as f64;
    for i in 1..m - 1 {
        let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        let dd = 2.0 * ((v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0) / (h0 + h1);
        out[i] = dd * hbar * hbar;
    }
    out
}

/// Evaluates the three reciprocal polar volumes along {L_t} and their
/// discrete second differences (convex in t).
pub fn polar_volume_convexity_probe(fam: &ShadowFamily, ts: &[f64]) -> Result<ConvexityReport> {
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FireyError::InvalidInput("t samples must be strictly increasing".into()));
    }
    let e = fam.direction();
    let vals: Vec<Result<[f64; 3]>> = ts
        .par_iter()
        .map(|&t| {
            let p = fam.polygon_at(t)?;
            let l = ProfileSupport::from_polygon(*fam.grid(), p.clone())?;
            let s = santalo_point(&l)?;
            let polar = p.polar([0.0, 0.0])?;
            let plus = polar.clip([-e[0], -e[1]], 0.0).map(|q| q.area()).unwrap_or(0.0);
            let minus = polar.clip(e, 0.0).map(|q| q.area()).unwrap_or(0.0);
            Ok([1.0 / s.polar_area, 1.0 / plus, 1.0 / minus])
        })
        .collect();
    let vals: Vec<[f64; 3]> = vals.into_iter().collect::<Result<_>>()?;
    let mut sd = [Vec::new(), Vec::new(), Vec::new()];
    for (c, out) in sd.iter_mut().enumerate() {
        let col: Vec<f64> = vals.iter().map(|v| v[c]).collect();
        *out = second_differences(ts, &col);
    }
    let m = ts.len();
    let rows = (0..m)
        .map(|i| ConvexityRow {
            t: ts[i],
            inv_santalo: vals[i][0],
            inv_half_plus: vals[i][1],
            inv_half_minus: vals[i][2],
            second_diff: [sd[0][i], sd[1][i], sd[2][i]],
        })
        .collect();
    let mut mins = [0.0f64; 3];
    for c in 0..3 {
        if m >= 3 {
            mins[c] = sd[c][1..m - 1].iter().copied().fold(f64::INFINITY, f64::min);
        }
    }
    Ok(ConvexityReport { direction: e, rows, min_second_diff: mins })
}

/// Uniform t-samples on [−1, 1].
pub fn uniform_ts(count: usize) -> Vec<f64> {
    (0..count).map(|i| -1.0 + 2.0 * i as f64 / (count - 1) as f64).collect()
}

/// Left difference quotients of h_{L^t}(v) at t = 1⁻, L^t = ((L°)_t)°.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolarDerivativeProbe {
    pub direction: Vec2,
    pub angles: Vec<f64>,
    /// Ladder parameters t_j = 1 − 2^{−j}.
    pub ts: Vec<f64>,
    /// quotients[i][j] for angle i and rung j.
    pub quotients: Vec<Vec<f64>>,
    /// Richardson values 2q_last − q_prev.
    pub derivative: Vec<f64>,
    pub max_abs_quotient: f64,
}

/// Polar shadow family of L, i.e. the shadow system of L° along e.
pub fn polar_shadow_family(l: &ProfileSupport, e: Vec2) -> Result<ShadowFamily> {
    l.require_origin_interior()?;
    let poly = boundary_polygon(l, BOUNDARY_SAMPLES)?;
    let polar = poly.polar([0.0, 0.0])?;
    ShadowFamily::from_polygon(*l.grid(), &polar, e)
}

/// h′_L at the given angles by the quotient ladder t = 1 − 2^{−j},
/// j = 6..14, with Richardson extrapolation of the last two rungs.
pub fn polar_shadow_derivatives(l: &ProfileSupport, e: Vec2, angles: &[f64]) -> Result<PolarDerivativeProbe> {
    let fam = polar_shadow_family(l, e)?;
    let ts: Vec<f64> = LADDER.map(|j| 1.0 - 2f64.powi(-j)).collect();
    let dirs: Vec<Vec2> = angles.iter().map(|a| [a.cos(), a.sin()]).collect();
    let quotients: Vec<Vec<f64>> = dirs
        .par_iter()
        .map(|&v| -> Result<Vec<f64>> {
            let q1 = 1.0 / fam.radial_at(1.0, v)?;
            ts.iter().map(|&t| Ok((q1 - 1.0 / fam.radial_at(t, v)?) / (1.0 - t))).collect()
        })
        .collect::<Result<_>>()?;
    let scale = l.max_value().abs().max(1.0);
    let mut max_abs = 0.0f64;
    let mut derivative = Vec::with_capacity(angles.len());
    for (i, q) in quotients.iter().enumerate() {
        let k = q.len();
        let local = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !local.is_finite() || local > 1e8 * scale {
            return Err(FireyError::NonConvergence {
                what: "polar shadow derivative".into(),
                detail: format!("quotient ladder diverges at angle {}", angles[i]),
                trace: q.clone(),
            });
        }
        // Rungs must settle: late differences may not exceed early ones.
        let early = (q[1] - q[0]).abs();
        let late = (q[k - 1] - q[k - 2]).abs();
        if late <= 2.0 * early + 1e-6 * scale {
            max_abs = max_abs.max(local);
            derivative.push(2.0 * q[k - 1] - q[k - 2]);
            continue;
        }
        // A vertex of the polygonal L° crossed the ray inside the ladder:
        // extend it past the crossing until two successive rungs agree.
        let q1 = 1.0 / fam.radial_at(1.0, dirs[i])?;
        let mut ext = q.clone();
        let mut found = None;
        for j in LADDER.end() + 1..=EXTENDED_RUNG {
            let s = 2f64.powi(-j);
            ext.push((q1 - 1.0 / fam.radial_at(1.0 - s, dirs[i])?) / s);
            let m = ext.len();
            let settled = (ext[m - 1] - ext[m - 2]).abs() <= SETTLE_TOL * scale
                && (ext[m - 2] - ext[m - 3]).abs() <= SETTLE_TOL * scale;
            if settled {
                found = Some(2.0 * ext[m - 1] - ext[m - 2]);
                break;
            }
        }
        match found {
            Some(d) => {
                max_abs = max_abs.max(ext.iter().fold(0.0f64, |m, v| m.max(v.abs())));
                derivative.push(d);
            }
            None => {
                return Err(FireyError::NonConvergence {
                    what: "polar shadow derivative".into(),
                    detail: format!("quotient ladder does not settle at angle {}", angles[i]),
                    trace: ext,
                })
            }
        }
    }
    Ok(PolarDerivativeProbe {
        direction: fam.direction(),
        angles: angles.to_vec(),
        ts,
        quotients,
        derivative,
        max_abs_quotient: max_abs,
    })
}

/// h′_L(v) for a single direction angle.
pub fn polar_shadow_left_derivative(l: &ProfileSupport, e: Vec2, angle: f64) -> Result<f64> {
    Ok(polar_shadow_derivatives(l, e, &[angle])?.derivative[0])
}

/// (∫G(h_L)h′_L dH, ∫h′_L dS_L).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ShadowDerivativeIntegrals {
    pub weighted: f64,
    pub surface: f64,
}

/// Both integrals by grid quadrature; the surface integral is the exact
/// edge sum for polygons.
pub fn shadow_derivative_integrals(
    l: &ProfileSupport,
    e: Vec2,
    g: &dyn GFunction,
) -> Result<ShadowDerivativeIntegrals> {
    let (lo, hi) = g.domain();
    let out: Vec<f64> = l.values().iter().copied().filter(|&v| v < lo || v > hi).take(8).collect();
    if !out.is_empty() {
        return Err(FireyError::DomainViolation { values: out, lo, hi });
    }
    let grid = l.grid();
    let angles = grid.angles();
    let probe = polar_shadow_derivatives(l, e, &angles)?;
    let step = grid.step();
    let weighted: f64 = l.values().iter().zip(&probe.derivative).map(|(&h, d)| step * g.eval(h) * d).sum();
    let surface = match l.outline() {
        Some(p) => {
            let edges = p.edges();
            let normals: Vec<f64> = edges.iter().map(|e| e.normal[1].atan2(e.normal[0])).collect();
            let d = polar_shadow_derivatives(l, e, &normals)?;
            edges.iter().zip(&d.derivative).map(|(e, v)| e.length * v).sum()
        }
        None => {
            let f = crate::measure_calculus::density_planar(l)?;
            f.f.iter().zip(&probe.derivative).map(|(f, d)| step * f * d).sum()
        }
    };
    Ok(ShadowDerivativeIntegrals { weighted, surface })
}

/// Left derivative at t = 1 of t ↦ V(B ∩ aL_t). With chord [Z, W] of aL
/// over x̄, midline U and ball half-chord β = √(1 − x̄²), the chordwise
/// left derivative is U([W < β] − [Z > −β]) plus the boundary terms
/// max(U, 0)[W = β] − min(U, 0)[Z = −β]; it is pointwise ≤ 0.
pub fn ball_intersection_derivative(l: &ProfileSupport, e: Vec2, a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(FireyError::InvalidInput(format!("scale a must be positive, got {a}")));
    }
    let fam = ShadowFamily::new(l, e)?;
    Ok(ball_intersection_derivative_family(&fam, a))
}

pub fn ball_intersection_derivative_family(fam: &ShadowFamily, a: f64) -> f64 {
    let chord = |x: f64| fam.chord(x / a).map(|(z, w)| (a * z, a * w));
    let beta = |x: f64| (1.0 - x * x).max(0.0).sqrt();
    let rate = |x: f64| -> f64 {
        let Some((z, w)) = chord(x) else { return 0.0 };
        let b = beta(x);
        if w.min(b) <= z.max(-b) {
            return 0.0;
        }
        let u = 0.5 * (z + w);
        let top = if w < b {
            u
        } else if w == b {
            u.max(0.0)
        } else {
            0.0
        };
        let bottom = if z > -b {
            u
        } else if z == -b {
            u.min(0.0)
        } else {
            0.0
        };
        top - bottom
    };
    // Breakpoints: chain vertices, the ball ends and every crossing of a
    // chord end with the circle, so the integrand is linear on each piece.
    let (xlo, xhi) = (a * fam.xbar[0], a * fam.xbar.last().unwrap());
    let lo = xlo.max(-1.0);
    let hi = xhi.min(1.0);
    if hi <= lo {
        return 0.0;
    }
    let mut br: Vec<f64> = fam.xbar.iter().map(|x| a * x).filter(|x| *x > lo && *x < hi).collect();
    br.push(lo);
    br.push(hi);
    br.sort_by(f64::total_cmp);
    let mut pts = br.clone();
    let gap = |x: f64, upper: bool| -> f64 {
        let (z, w) = chord(x).unwrap_or((0.0, 0.0));
        if upper {
            w - beta(x)
        } else {
            z + beta(x)
        }
    };
    for pair in br.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        // β is concave, so each end crosses the circle at most twice per
        // linear piece; four sub-cells separate the roots.
        for sub in 0..4 {
            let s0 = p + (q - p) * sub as f64 / 4.0;
            let s1 = p + (q - p) * (sub + 1) as f64 / 4.0;
            for upper in [true, false] {
                let (mut x0, mut x1) = (s0, s1);
                let (mut g0, g1) = (gap(x0, upper), gap(x1, upper));
                if g0 == 0.0 || g1 == 0.0 || g0.signum() == g1.signum() {
                    continue;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (x0 + x1);
                    let gm = gap(mid, upper);
                    if gm.signum() == g0.signum() {
                        x0 = mid;
                        g0 = gm;
                    } else {
                        x1 = mid;
                    }
                    if x1 - x0 < 1e-15 {
                        break;
                    }
                }
                pts.push(0.5 * (x0 + x1));
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    // Midpoint rule is exact for the linear U on each piece.
    pts.windows(2).map(|w| (w[1] - w[0]) * rate(0.5 * (w[0] + w[1]))).sum()
}

/// Polar-area decrease V((L−s)°) − V((St_e L − s′)°) over a finite set of
/// directions; the best direction found, with no claim of exhaustiveness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectionSearch {
    pub best_direction: Vec2,
    pub best_decrease: f64,
    pub decreases: Vec<(f64, f64)>,
}

pub fn best_symmetrization_direction(l: &ProfileSupport, count: usize) -> Result<DirectionSearch> {
    let base = santalo_polar_area(l)?;
    let fam_angles: Vec<f64> = (0..count).map(|k| std::f64::consts::PI * k as f64 / count as f64).collect();
    let dec: Vec<Result<(f64, f64)>> = fam_angles
        .par_iter()
        .map(|&th| {
            let st = steiner_symmetral(l, [th.cos(), th.sin()])?;
            Ok((th, santalo_polar_area(&st)? - base))
        })
        .collect();
    let decreases: Vec<(f64, f64)> = dec.into_iter().collect::<Result<_>>()?;
    let (th, best) =
        decreases.iter().copied().fold((0.0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
    Ok(DirectionSearch { best_direction: [th.cos(), th.sin()], best_decrease: best, decreases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> CircleGrid {
        CircleGrid::new(1024).unwrap()
    }

    fn quad(pts: &[Vec2]) -> ProfileSupport {
        ProfileSupport::from_polygon(grid(), Polygon::hull(pts).unwrap()).unwrap()
    }

    #[test]
    fn endpoints_of_the_family() {
        let l = quad(&[[-1.0, -0.5], [1.5, -0.2], [0.7, 1.1], [-0.6, 0.8]]);
        let e = [0.3f64.cos(), 0.3f64.sin()];
        let fam = ShadowFamily::new(&l, e).unwrap();
        let l1 = fam.shadow_body(1.0).unwrap();
        let refl = ProfileSupport::from_polygon(grid(), l.outline().unwrap().reflect(e).unwrap()).unwrap();
        let lm1 = fam.shadow_body(-1.0).unwrap();
        for k in 0..grid().len() {
            assert!((l1.values()[k] - l.values()[k]).abs() < 1e-13);
            assert!((lm1.values()[k] - refl.values()[k]).abs() < 1e-13);
        }
        let a = l.outline().unwrap().area();
        for t in [-0.7, 0.0, 0.4] {
            assert!((fam.polygon_at(t).unwrap().area() - a).abs() < 1e-13);
        }
        assert!(fam.polygon_at(1.2).is_err());
    }

    #[test]
    fn shifted_rectangle_symmetral_is_centred() {
        let l = quad(&[[-1.0, 0.2], [2.0, 0.2], [2.0, 1.0], [-1.0, 1.0]]);
        let st = steiner_symmetral(&l, [0.0, 1.0]).unwrap();
        let p = st.outline().unwrap();
        let c = p.centroid();
        assert!((c[0] - 0.5).abs() < 1e-14 && c[1].abs() < 1e-14);
        assert!((p.area() - 2.4).abs() < 1e-13);
    }

    #[test]
    fn smooth_body_area_preserved() {
        let e = ProfileSupport::ellipse(grid(), 2.0, 0.7, 0.5, [0.3, -0.1]).unwrap();
        let st = steiner_symmetral(&e, [0.0, 1.0]).unwrap();
        let a = st.outline().unwrap().area();
        assert!((a - 1.4 * PI).abs() / (1.4 * PI) < 1e-6, "{a}");
    }

    #[test]
    fn santalo_point_of_translated_square() {
        let l = quad(&[[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]);
        let s = santalo_point(&l).unwrap();
        assert!((s.point[0] - 1.0).abs() < 1e-12 && (s.point[1] - 1.0).abs() < 1e-12);
        assert!(s.grad_norm <= SANTALO_GRAD_TOL);
        // polar of [−1,1]² is the diamond of area 2
        assert!((s.polar_area - 2.0).abs() < 1e-12);
    }

    #[test]
    fn santalo_point_of_smooth_ellipse() {
        let e = ProfileSupport::ellipse(grid(), 1.5, 0.8, 0.2, [0.2, 0.1]).unwrap();
        let s = santalo_point(&e).unwrap();
        assert!((s.point[0] - 0.2).abs() < 1e-10 && (s.point[1] - 0.1).abs() < 1e-10);
        assert!((s.polar_area - PI / 1.2).abs() < 1e-10);
    }

    #[test]
    fn disc_probe_is_flat() {
        let d = ProfileSupport::disc(grid(), 1.0, [0.0, 0.0]).unwrap();
        let fam = ShadowFamily::new(&d, [0.0, 1.0]).unwrap();
        let r = polar_volume_convexity_probe(&fam, &uniform_ts(5)).unwrap();
        for c in 0..3 {
            assert!(r.min_second_diff[c].abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_body_has_zero_polar_derivative() {
        let l = quad(&[[-1.0, -0.5], [1.0, -0.5], [0.3, 0.5], [-0.3, 0.5]]);
        // symmetric across the x₂-axis, i.e. across e⊥ for e = e₁
        let probe = polar_shadow_derivatives(&l, [1.0, 0.0], &grid().angles()).unwrap();
        assert!(probe.derivative.iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn ball_derivative_zero_for_symmetric_and_negative_for_shifted() {
        let d = ProfileSupport::disc(grid(), 0.8, [0.0, 0.0]).unwrap();
        assert!(ball_intersection_derivative(&d, [0.0, 1.0], 1.1).unwrap().abs() < 1e-12);
        let s = ProfileSupport::disc(grid(), 0.8, [0.0, 0.3]).unwrap();
        let vals: Vec<f64> = (0..16)
            .map(|i| ball_intersection_derivative(&s, [0.0, 1.0], 0.5 + 1.5 * i as f64 / 15.0).unwrap())
            .collect();
        assert!(vals.iter().all(|v| *v <= 1e-12));
        assert!(vals.iter().any(|v| *v < -1e-6));
    }

    #[test]
    fn second_difference_is_plain_on_uniform_ladder() {
        let t = [0.0, 0.5, 1.0];
        let v = [1.0, 0.0, 2.0];
        assert!((second_differences(&t, &v)[1] - 3.0).abs() < 1e-15);
    }
}

//! Body representations: sampled support functions, bodies of revolution and
//! point clouds.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{FireyError, Result};
use crate::geometry_core::grid::CircleGrid;
use crate::geometry_core::polygon::{dot, Polygon, Vec2};
use crate::geometry_core::spectral::TrigInterp;

/// Relative factor of the default convexity tolerance.
pub const TOL_CONVEX_REL: f64 = 1e-6;

/// Sampled support function h̄(φ_k) of a planar convex body.
///
/// Smooth bodies use the trigonometric interpolant of the samples for
/// off-grid evaluation. Polygonal bodies additionally carry their exact
/// outline, which every geometric query prefers.
#[derive(Clone, Debug)]
pub struct ProfileSupport {
    grid: CircleGrid,
    h: Vec<f64>,
    outline: Option<Polygon>,
    interp: OnceLock<TrigInterp>,
}

/// Discrete radius of curvature at each node, exact for h ∈ span{1, cos, sin}
/// and nonnegative for samples of any convex body.
pub fn discrete_radius(h: &[f64], step: f64) -> Vec<f64> {
    let n = h.len();
    let c = step.cos();
    let denom = 2.0 * (1.0 - c);
    (0..n).map(|k| (h[(k + n - 1) % n] + h[(k + 1) % n] - 2.0 * h[k] * c) / denom).collect()
}

fn check_convex(grid: &CircleGrid, h: &[f64], tol_rel: f64) -> Result<()> {
    let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tol = tol_rel * scale;
    let r = discrete_radius(h, grid.step());
    let mut bad: Vec<usize> = Vec::new();
    let mut worst = 0.0f64;
    for (k, &v) in r.iter().enumerate() {
        if v < -tol {
            bad.push(k);
            worst = worst.min(v);
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        bad.truncate(16);
        Err(FireyError::NonConvex { nodes: bad, worst, tol })
    }
}

impl ProfileSupport {
    /// Validates length, finiteness and discrete convexity with the default
    /// tolerance 1e-6·max|h̄|.
    pub fn new(grid: CircleGrid, h: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(grid, h, TOL_CONVEX_REL)
    }

    pub fn with_tolerance(grid: CircleGrid, h: Vec<f64>, tol_rel: f64) -> Result<Self> {
        if h.len() != grid.len() {
            return Err(FireyError::GridMismatch { left: h.len(), right: grid.len() });
        }
        if let Some(k) = h.iter().position(|v| !v.is_finite()) {
            return Err(FireyError::InvalidInput(format!("non-finite support value at node {k}")));
        }
        check_convex(&grid, &h, tol_rel)?;
        Ok(Self { grid, h, outline: None, interp: OnceLock::new() })
    }

    pub fn from_fn(grid: CircleGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = grid.angles().into_iter().map(f).collect();
        Self::new(grid, h)
    }

    /// Polygonal body sampled exactly at the nodes.
    pub fn from_polygon(grid: CircleGrid, poly: Polygon) -> Result<Self> {
        let h = poly.support_on_grid(&grid);
        check_convex(&grid, &h, TOL_CONVEX_REL)?;
        Ok(Self { grid, h, outline: Some(poly), interp: OnceLock::new() })
    }

    /// Disc of radius r centred at c.
    pub fn disc(grid: CircleGrid, r: f64, c: Vec2) -> Result<Self> {
        Self::from_fn(grid, |p| r + c[0] * p.cos() + c[1] * p.sin())
    }

    /// Ellipse with semi-axes a (rotated by `rot`) and b, centred at c.
    pub fn ellipse(grid: CircleGrid, a: f64, b: f64, rot: f64, c: Vec2) -> Result<Self> {
        Self::from_fn(grid, |p| {
            let (s, co) = (p - rot).sin_cos();
            (a * a * co * co + b * b * s * s).sqrt() + c[0] * p.cos() + c[1] * p.sin()
        })
    }

    pub fn grid(&self) -> &CircleGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn outline(&self) -> Option<&Polygon> {
        self.outline.as_ref()
    }

    pub fn is_polygonal(&self) -> bool {
        self.outline.is_some()
    }

    pub fn interp(&self) -> &TrigInterp {
        self.interp.get_or_init(|| TrigInterp::new(&self.h))
    }

    /// h̄ at an arbitrary angle.
    pub fn eval(&self, phi: f64) -> f64 {
        match &self.outline {
            Some(p) => p.support([phi.cos(), phi.sin()]),
            None => self.interp().eval(phi),
        }
    }

    /// (h̄, h̄′, h̄″) from the trigonometric interpolant.
    pub fn eval3(&self, phi: f64) -> (f64, f64, f64) {
        self.interp().eval3(phi)
    }

    pub fn min_value(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.h.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Errors unless every sample is positive (and, for polygons, the origin
    /// is strictly inside the outline).
    pub fn require_origin_interior(&self) -> Result<()> {
        if let Some((k, &v)) = self.h.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            return Err(FireyError::OriginNotInterior { node: k, value: v });
        }
        if let Some(p) = &self.outline {
            let m = p.interior_margin([0.0, 0.0]);
            if m <= 0.0 {
                return Err(FireyError::OriginNotInterior { node: 0, value: m });
            }
        }
        Ok(())
    }

    pub fn discrete_radius(&self) -> Vec<f64> {
        discrete_radius(&self.h, self.grid.step())
    }

    /// Support function of L + a.
    pub fn translated(&self, a: Vec2) -> Self {
        let h = self.h.iter().enumerate().map(|(k, v)| v + dot(a, self.grid.unit(k))).collect();
        Self { grid: self.grid, h, outline: self.outline.as_ref().map(|p| p.translate(a)), interp: OnceLock::new() }
    }

    /// Rotation of the body by `shift` grid steps (counter-clockwise).
    pub fn rotated_nodes(&self, shift: usize) -> Result<Self> {
        let n = self.grid.len();
        let h = (0..n).map(|k| self.h[(k + n - shift % n) % n]).collect();
        match &self.outline {
            Some(p) => {
                let a = self.grid.angle(shift % n);
                let (s, c) = a.sin_cos();
                Self::from_polygon(self.grid, p.linear_image([[c, -s], [s, c]])?)
            }
            None => Ok(Self { grid: self.grid, h, outline: None, interp: OnceLock::new() }),
        }
    }

    /// Samples without validation, for internal constructions whose
    /// convexity is guaranteed or checked later.
    pub(crate) fn from_raw(grid: CircleGrid, h: Vec<f64>, outline: Option<Polygon>) -> Self {
        Self { grid, h, outline, interp: OnceLock::new() }
    }
}

/// Common interface of planar bodies and bodies of revolution.
pub trait Body {
    fn dim(&self) -> usize;
    fn profile(&self) -> &ProfileSupport;
}

impl Body for ProfileSupport {
    fn dim(&self) -> usize {
        2
    }
    fn profile(&self) -> &ProfileSupport {
        self
    }
}

/// Body of revolution about the x₂-axis in ℝⁿ, carried by its profile in the
/// (x₁, x₂)-plane.
#[derive(Clone, Debug)]
pub struct AxisymBody {
    n: usize,
    profile: ProfileSupport,
}

impl AxisymBody {
    /// Checks h̄(π − φ) = h̄(φ) to 1e-9 relative.
    pub fn new(n: usize, profile: ProfileSupport) -> Result<Self> {
        if !(2..=16).contains(&n) {
            return Err(FireyError::InvalidInput(format!("dimension {n} outside 2..=16")));
        }
        let g = profile.grid();
        let scale = profile.max_value().abs().max(1.0);
        for k in 0..g.len() {
            let d = (profile.values()[k] - profile.values()[g.mirror_index(k)]).abs();
            if d > 1e-9 * scale {
                return Err(FireyError::AxisSymmetry { node: k, deviation: d });
            }
        }
        Ok(Self { n, profile })
    }

    pub fn ball(grid: CircleGrid, n: usize, r: f64, shift: f64) -> Result<Self> {
        Self::new(n, ProfileSupport::disc(grid, r, [0.0, shift])?)
    }

    pub fn translated_axis(&self, shift: f64) -> Self {
        Self { n: self.n, profile: self.profile.translated([0.0, shift]) }
    }
}

impl Body for AxisymBody {
    fn dim(&self) -> usize {
        self.n
    }
    fn profile(&self) -> &ProfileSupport {
        &self.profile
    }
}

/// Finite planar point set used as source data for support functions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Vec2>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        if points.is_empty() {
            return Err(FireyError::InvalidInput("empty point cloud".into()));
        }
        Ok(Self { points })
    }
}

/// h̄(φ_k) = max_p ⟨u_k, p⟩, carrying the hull as the exact outline.
pub fn support_from_points(cloud: &PointCloud, grid: CircleGrid) -> Result<ProfileSupport> {
    if cloud.points.is_empty() {
        return Err(FireyError::InvalidInput("empty point cloud".into()));
    }
    let poly = Polygon::hull(&cloud.points)?;
    let h: Vec<f64> = (0..grid.len())
        .map(|k| {
            let u = grid.unit(k);
            cloud.points.iter().map(|&p| dot(u, p)).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    Ok(ProfileSupport::from_raw(grid, h, Some(poly)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, TAU};

    #[test]
    fn square_cloud_support() {
        let g = CircleGrid::new(8).unwrap();
        let c = PointCloud::new(vec![[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]).unwrap();
        let s = support_from_points(&c, g).unwrap();
        assert_eq!(s.values()[0], 1.0);
        assert!((s.values()[1] - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.eval(FRAC_PI_4) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dense_circle_cloud_is_unit_disc() {
        let g = CircleGrid::new(1024).unwrap();
        let pts = (0..10_000).map(|j| {
            let t = TAU * j as f64 / 10_000.0;
            [t.cos(), t.sin()]
        });
        let s = support_from_points(&PointCloud::new(pts.collect()).unwrap(), g).unwrap();
        assert!(s.values().iter().all(|v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn empty_cloud_is_rejected() {
        assert!(PointCloud::new(vec![]).is_err());
        let g = CircleGrid::new(8).unwrap();
        assert!(support_from_points(&PointCloud { points: vec![] }, g).is_err());
    }

    #[test]
    fn nonconvex_samples_are_rejected_with_nodes() {
        let g = CircleGrid::new(64).unwrap();
        // h = 1 + 0.2 cos 4φ has h'' + h = 1 − 3.0 cos 4φ < 0 somewhere.
        let err = ProfileSupport::from_fn(g, |p| 1.0 + 0.2 * (4.0 * p).cos()).unwrap_err();
        match err {
            FireyError::NonConvex { nodes, .. } => assert!(nodes.contains(&0)),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn axisym_rejects_asymmetric_profile() {
        let g = CircleGrid::new(64).unwrap();
        let p = ProfileSupport::disc(g, 1.0, [0.2, 0.0]).unwrap();
        assert!(AxisymBody::new(3, p).is_err());
        let q = ProfileSupport::disc(g, 1.0, [0.0, 0.2]).unwrap();
        assert!(AxisymBody::new(3, q).is_ok());
    }
}

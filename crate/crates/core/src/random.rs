//! Seeded generators of random convex bodies for property tests and
//! acceptance runs.

use rand::Rng;
use std::f64::consts::TAU;

use crate::error::Result;
use crate::geometry_core::body::ProfileSupport;
use crate::geometry_core::centroid::barycentre;
use crate::geometry_core::grid::CircleGrid;
use crate::geometry_core::polygon::{Polygon, Vec2};

/// Highest Fourier mode used by the smooth generators.
pub const MAX_MODE: usize = 6;

fn smooth_profile<R: Rng>(grid: CircleGrid, rng: &mut R, even_only: bool, shift: f64) -> Result<ProfileSupport> {
    let r0 = rng.gen_range(0.6..1.6);
    // Curvature radius r0 + Σ (1 − k²)(a_k cos kφ + b_k sin kφ) stays ≥ r0/4.
    let budget = 0.75 * r0 * rng.gen_range(0.2..1.0);
    let modes: Vec<usize> = (2..=MAX_MODE).filter(|k| !even_only || k % 2 == 0).collect();
    let raw: Vec<(f64, f64)> = modes.iter().map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let total: f64 = modes.iter().zip(&raw).map(|(&k, (a, b))| (k * k - 1) as f64 * (a.abs() + b.abs())).sum();
    let s = budget / total.max(1e-300);
    let coef: Vec<(usize, f64, f64)> = modes.iter().zip(&raw).map(|(&k, (a, b))| (k, a * s, b * s)).collect();
    let ang = rng.gen_range(0.0..TAU);
    let c = [shift * ang.cos(), shift * ang.sin()];
    ProfileSupport::from_fn(grid, |p| {
        r0 + c[0] * p.cos()
            + c[1] * p.sin()
            + coef.iter().map(|&(k, a, b)| a * (k as f64 * p).cos() + b * (k as f64 * p).sin()).sum::<f64>()
    })
}

/// Smooth strictly convex body with the origin well inside. Its translation
/// is at most a quarter of the inradius bound.
pub fn random_smooth_body<R: Rng>(grid: CircleGrid, rng: &mut R) -> Result<ProfileSupport> {
    let t = rng.gen_range(0.0..0.15);
    smooth_profile(grid, rng, false, t)
}

/// Smooth centrally symmetric body centred at the origin.
pub fn random_symmetric_smooth_body<R: Rng>(grid: CircleGrid, rng: &mut R) -> Result<ProfileSupport> {
    smooth_profile(grid, rng, true, 0.0)
}

/// Smooth body with odd modes, translated so that its barycentre is the origin.
pub fn random_asymmetric_centred_body<R: Rng>(grid: CircleGrid, rng: &mut R) -> Result<ProfileSupport> {
    let body = smooth_profile(grid, rng, false, 0.0)?;
    let b = barycentre(&body)?;
    Ok(body.translated([-b[0], -b[1]]))
}

fn random_points<R: Rng>(rng: &mut R, m: usize) -> Vec<Vec2> {
    let (a, b) = (rng.gen_range(0.6..1.6), rng.gen_range(0.6..1.6));
    (0..m)
        .map(|_| {
            let t = rng.gen_range(0.0..TAU);
            let r = rng.gen_range(0.7..1.0);
            [a * r * t.cos(), b * r * t.sin()]
        })
        .collect()
}

/// Hull of m random points around an ellipse, translated so its centroid is
/// the origin.
pub fn random_polygon<R: Rng>(rng: &mut R, m: usize) -> Result<Polygon> {
    loop {
        let hull = Polygon::hull(&random_points(rng, m.max(3)))?;
        if hull.len() >= 3 {
            let c = hull.centroid();
            return Ok(hull.translate([-c[0], -c[1]]));
        }
    }
}

/// Hull of ±p for m random points p.
pub fn random_symmetric_polygon<R: Rng>(rng: &mut R, m: usize) -> Result<Polygon> {
    let mut pts = random_points(rng, m.max(2));
    let neg: Vec<Vec2> = pts.iter().map(|p| [-p[0], -p[1]]).collect();
    pts.extend(neg);
    Polygon::hull(&pts)
}

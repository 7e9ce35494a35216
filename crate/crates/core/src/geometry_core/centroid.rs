//! Steiner point, area barycentre and the inradius/circumradius sandwich.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry_core::body::Body;
use crate::geometry_core::duality::radial_samples;
use crate::geometry_core::grid::{ball_volume, SphereQuadrature};
use crate::geometry_core::polygon::Vec2;

/// s(K) = (1/κ_n) ∫ h_K(u) u dH(u). Always interior, so it serves as a safe
/// centre for polar-coordinate integrals.
pub fn steiner_point(body: &dyn Body) -> Result<Vec2> {
    let l = body.profile();
    let g = l.grid();
    let q = SphereQuadrature::new(g, body.dim())?;
    let kappa = ball_volume(body.dim());
    let h = l.values();
    let y = q.integrate_fn(|k| h[k] * g.sin_at(k)) / kappa;
    let x = if body.dim() == 2 { q.integrate_fn(|k| h[k] * g.cos_at(k)) / kappa } else { 0.0 };
    Ok([x, y])
}

/// Area (volume) centroid via the polar-coordinate moment integral about the
/// Steiner point; exact polygon centroid for polygonal outlines.
pub fn barycentre(body: &dyn Body) -> Result<Vec2> {
    let l = body.profile();
    if body.dim() == 2 {
        if let Some(p) = l.outline() {
            return Ok(p.centroid());
        }
    }
    let n = body.dim();
    let s = steiner_point(body)?;
    let centred = l.translated([-s[0], -s[1]]);
    let rho = radial_samples(&centred)?;
    let g = l.grid();
    let q = SphereQuadrature::new(g, n)?;
    let vol = q.integrate_fn(|k| rho[k].powi(n as i32)) / n as f64;
    let my = q.integrate_fn(|k| rho[k].powi(n as i32 + 1) * g.sin_at(k)) / (n as f64 + 1.0);
    let mx = if n == 2 { q.integrate_fn(|k| rho[k].powi(3) * g.cos_at(k)) / 3.0 } else { 0.0 };
    Ok([s[0] + mx / vol, s[1] + my / vol])
}

/// Inner and outer radii about the barycentre.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SandwichReport {
    pub center: Vec2,
    pub r_in: f64,
    pub r_out: f64,
    pub ratio: f64,
}

pub fn sandwich(body: &dyn Body) -> Result<SandwichReport> {
    let b = barycentre(body)?;
    let centred = body.profile().translated([-b[0], -b[1]]);
    let rho = radial_samples(&centred)?;
    let r_in = rho.iter().copied().fold(f64::INFINITY, f64::min);
    let r_out = rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SandwichReport { center: b, r_in, r_out, ratio: r_out / r_in })
}

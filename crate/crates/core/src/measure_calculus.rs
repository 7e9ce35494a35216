//! Surface-area-measure densities, volumes, mixed volumes and the
//! Monge–Ampère residual f_K − G(h_K).

use serde::{Deserialize, Serialize};

use crate::error::{FireyError, Result};
use crate::gclass::GFunction;
use crate::geometry_core::body::{Body, ProfileSupport};
use crate::geometry_core::centroid::steiner_point;
use crate::geometry_core::duality::radial_samples;
use crate::geometry_core::grid::{CircleGrid, SphereQuadrature};
use crate::geometry_core::polygon::Vec2;
use crate::geometry_core::spectral::{fd_derivative, spectral_derivative};

/// How derivatives of h̄ are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DiffMode {
    /// Trigonometric differentiation; spectrally accurate for smooth bodies.
    #[default]
    Spectral,
    /// Fourth-order centered differences; local, so gluing seams only
    /// pollute a two-cell band.
    FiniteDifference,
}

/// Density f of S_K against the spherical measure, sampled by latitude.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityField {
    pub n: usize,
    pub grid: CircleGrid,
    pub f: Vec<f64>,
    pub mode: DiffMode,
    /// Nodes whose slightly negative value was clamped to zero.
    pub clamped: Vec<usize>,
}

fn derivatives(l: &ProfileSupport, mode: DiffMode) -> (Vec<f64>, Vec<f64>) {
    let h = l.values();
    match mode {
        DiffMode::Spectral => (spectral_derivative(h, 1), spectral_derivative(h, 2)),
        DiffMode::FiniteDifference => {
            let s = l.grid().step();
            (fd_derivative(h, s, 1), fd_derivative(h, s, 2))
        }
    }
}

fn finish(n: usize, grid: CircleGrid, mut f: Vec<f64>, mode: DiffMode, scale: f64) -> Result<DensityField> {
    let tol = 1e-6 * scale;
    let mut clamped = Vec::new();
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for (k, v) in f.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v >= -tol {
                clamped.push(k);
                *v = 0.0;
            } else {
                bad.push(k);
                worst = worst.min(*v);
            }
        }
    }
    if !bad.is_empty() {
        bad.truncate(16);
        return Err(FireyError::NonConvex { nodes: bad, worst, tol });
    }
    if !clamped.is_empty() {
        log::warn!("clamped {} slightly negative density value(s) to zero", clamped.len());
    }
    Ok(DensityField { n, grid, f, mode, clamped })
}

fn reject_polygon(l: &ProfileSupport) -> Result<()> {
    if l.is_polygonal() {
        return Err(FireyError::Precondition(
            "polygonal body: the surface area measure is atomic and has no density".into(),
        ));
    }
    Ok(())
}

/// f = h̄″ + h̄ by spectral differentiation.
pub fn density_planar(l: &ProfileSupport) -> Result<DensityField> {
    density_planar_with(l, DiffMode::Spectral)
}

pub fn density_planar_with(l: &ProfileSupport, mode: DiffMode) -> Result<DensityField> {
    reject_polygon(l)?;
    let (_, h2) = derivatives(l, mode);
    let f = l.values().iter().zip(&h2).map(|(h, d)| h + d).collect();
    finish(2, *l.grid(), f, mode, l.max_value().abs())
}

/// Density of a body of revolution:
/// f = (h̄″ + h̄)·((h̄ cos φ − h̄′ sin φ)/cos φ)^{n−2}, with the pole value
/// (h̄″ + h̄)^{n−1}.
pub fn density_axisym(k: &dyn Body) -> Result<DensityField> {
    density_axisym_with(k, DiffMode::Spectral)
}

pub fn density_axisym_with(k: &dyn Body, mode: DiffMode) -> Result<DensityField> {
    let n = k.dim();
    let l = k.profile();
    if n == 2 {
        return density_planar_with(l, mode);
    }
    reject_polygon(l)?;
    let g = l.grid();
    let (h1, h2) = derivatives(l, mode);
    let h = l.values();
    let f = (0..g.len())
        .map(|j| {
            let r = h2[j] + h[j];
            if g.is_pole(j) {
                r.powi(n as i32 - 1)
            } else {
                let (s, c) = (g.sin_at(j), g.cos_at(j));
                let rot = (h[j] * c - h1[j] * s) / c;
                r * rot.powi(n as i32 - 2)
            }
        })
        .collect();
    finish(n, *g, f, mode, l.max_value().abs().powi(n as i32 - 1))
}

/// Dispatches on the body dimension.
pub fn density(body: &dyn Body, mode: DiffMode) -> Result<DensityField> {
    density_axisym_with(body, mode)
}

/// V = (1/n)∫ρⁿ dH about the Steiner point; exact shoelace for polygons.
pub fn volume(body: &dyn Body) -> Result<f64> {
    let l = body.profile();
    if body.dim() == 2 {
        if let Some(p) = l.outline() {
            return Ok(p.area());
        }
    }
    let s = steiner_point(body)?;
    let centred = l.translated([-s[0], -s[1]]);
    let rho = radial_samples(&centred)?;
    let n = body.dim();
    let q = SphereQuadrature::new(l.grid(), n)?;
    Ok(q.integrate_fn(|k| rho[k].powi(n as i32)) / n as f64)
}

fn check_compatible(a: &dyn Body, b: &dyn Body) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(FireyError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    let (ga, gb) = (a.profile().grid().len(), b.profile().grid().len());
    if ga != gb {
        return Err(FireyError::GridMismatch { left: ga, right: gb });
    }
    Ok(())
}

/// V(L, M) = (1/n)∫h_L dS_M.
pub fn mixed_volume(l: &dyn Body, m: &dyn Body) -> Result<f64> {
    check_compatible(l, m)?;
    let n = l.dim();
    if n == 2 {
        // Planar mixed area is symmetric, so a polygon on either side gives
        // the exact edge sum.
        let (lp, outline) = match (m.profile().outline(), l.profile().outline()) {
            (Some(p), _) => (l.profile(), Some(p)),
            (None, Some(p)) => (m.profile(), Some(p)),
            _ => (l.profile(), None),
        };
        if let Some(poly) = outline {
            return Ok(
                0.5 * poly.edges().iter().map(|e| lp.eval(e.normal[1].atan2(e.normal[0])) * e.length).sum::<f64>()
            );
        }
    }
    let f = density(m, DiffMode::Spectral)?;
    let q = SphereQuadrature::new(l.profile().grid(), n)?;
    let h = l.profile().values();
    Ok(q.integrate_fn(|k| h[k] * f.f[k]) / n as f64)
}

/// Closure diagnostic for the barycentre of S_K.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SurfaceClosure {
    pub vector: Vec2,
    pub total: f64,
    pub relative: f64,
}

pub fn barycentre_of_surface_measure(body: &dyn Body) -> Result<SurfaceClosure> {
    let l = body.profile();
    if body.dim() == 2 {
        if let Some(p) = l.outline() {
            let edges = p.edges();
            let total: f64 = edges.iter().map(|e| e.length).sum();
            let v = edges
                .iter()
                .fold([0.0, 0.0], |acc, e| [acc[0] + e.length * e.normal[0], acc[1] + e.length * e.normal[1]]);
            return Ok(SurfaceClosure { vector: v, total, relative: v[0].hypot(v[1]) / total });
        }
    }
    let f = density(body, DiffMode::Spectral)?;
    let g = l.grid();
    let q = SphereQuadrature::new(g, body.dim())?;
    let total = q.integrate(&f.f);
    let y = q.integrate_fn(|k| f.f[k] * g.sin_at(k));
    let x = q.integrate_fn(|k| f.f[k] * g.cos_at(k));
    let v = if body.dim() == 2 { [x, y] } else { [0.0, y] };
    Ok(SurfaceClosure { vector: v, total, relative: v[0].hypot(v[1]) / total })
}

/// Neighbourhoods of seam angles excluded from the residual norms.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SeamBand {
    pub angles: Vec<f64>,
    /// Nodes on each side of the node nearest to a seam.
    pub half_width: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ResidualOptions {
    pub mode: DiffMode,
    pub seams: Option<SeamBand>,
    /// Extra node mask (true = excluded).
    pub exclude: Option<Vec<bool>>,
}

/// Pointwise residual r = f_K − G(h_K) with norms over the non-excluded nodes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    pub n: usize,
    pub phi: Vec<f64>,
    pub h: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub residual: Vec<f64>,
    pub excluded: Vec<bool>,
    pub max_abs: f64,
    pub l2: f64,
    pub argmax_phi: f64,
    /// Max over every node, excluded ones included.
    pub max_abs_all: f64,
}

impl ResidualReport {
    /// Rows (φ, h, f, G(h), r), one per node.
    pub fn csv_rows(&self) -> Vec<[f64; 5]> {
        (0..self.phi.len()).map(|k| [self.phi[k], self.h[k], self.f[k], self.g[k], self.residual[k]]).collect()
    }
}

pub fn monge_ampere_residual(body: &dyn Body, g: &dyn GFunction, opts: &ResidualOptions) -> Result<ResidualReport> {
    let l = body.profile();
    let grid = *l.grid();
    let (lo, hi) = g.domain();
    let slack = 1e-12 * hi.abs().max(1.0);
    let outside: Vec<f64> = l.values().iter().copied().filter(|&v| v < lo - slack || v > hi + slack).take(8).collect();
    if !outside.is_empty() {
        return Err(FireyError::DomainViolation { values: outside, lo, hi });
    }
    let dens = density(body, opts.mode)?;
    let n = grid.len();
    let mut excluded = opts.exclude.clone().unwrap_or_else(|| vec![false; n]);
    if excluded.len() != n {
        return Err(FireyError::GridMismatch { left: excluded.len(), right: n });
    }
    if let Some(band) = &opts.seams {
        for &a in &band.angles {
            let c = grid.nearest_index(a) as isize;
            for d in -(band.half_width as isize)..=(band.half_width as isize) {
                excluded[(c + d).rem_euclid(n as isize) as usize] = true;
            }
        }
    }
    let h = l.values().to_vec();
    let gv: Vec<f64> = h.iter().map(|&v| g.eval(v.clamp(lo, hi))).collect();
    let residual: Vec<f64> = dens.f.iter().zip(&gv).map(|(f, gg)| f - gg).collect();
    let mut max_abs = 0.0f64;
    let mut arg = 0usize;
    let mut sq = 0.0;
    for k in 0..n {
        if excluded[k] {
            continue;
        }
        let a = residual[k].abs();
        sq += a * a;
        if a > max_abs {
            max_abs = a;
            arg = k;
        }
    }
    let max_abs_all = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(ResidualReport {
        n: body.dim(),
        phi: grid.angles(),
        h,
        f: dens.f,
        g: gv,
        residual,
        excluded,
        max_abs,
        l2: (sq * grid.step()).sqrt(),
        argmax_phi: grid.angle(arg),
        max_abs_all,
    })
}

//! Convex polygons with exact support, radial and polar-area formulas.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use crate::error::{FireyError, Result};
use crate::geometry_core::grid::CircleGrid;

pub type Vec2 = [f64; 2];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

/// One edge of a convex polygon: outer unit normal, support offset ⟨n, x⟩ on
/// the edge, and length.
#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub normal: Vec2,
    pub offset: f64,
    pub length: f64,
}

/// Strictly convex polygon with counter-clockwise vertices.
#[derive(Clone, Debug)]
pub struct Polygon {
    vertices: Vec<Vec2>,
    angles: OnceLock<Vec<f64>>,
}

impl PartialEq for Polygon {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

const LOOKAHEAD: usize = 8;

impl Polygon {
    /// Convex hull by the monotone chain; collinear points are dropped.
    pub fn hull(points: &[Vec2]) -> Result<Self> {
        if points.is_empty() {
            return Err(FireyError::InvalidInput("empty point cloud".into()));
        }
        if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(FireyError::InvalidInput("non-finite point".into()));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup();
        if pts.len() < 3 {
            return Err(FireyError::InvalidInput("point cloud affine hull is not two-dimensional".into()));
        }
        let mut lower: Vec<Vec2> = Vec::with_capacity(pts.len());
        for &p in &pts {
            while lower.len() >= 2
                && cross(sub(lower[lower.len() - 1], lower[lower.len() - 2]), sub(p, lower[lower.len() - 1])) <= 0.0
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Vec2> = Vec::with_capacity(pts.len());
        for &p in pts.iter().rev() {
            while upper.len() >= 2
                && cross(sub(upper[upper.len() - 1], upper[upper.len() - 2]), sub(p, upper[upper.len() - 1])) <= 0.0
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        if lower.len() < 3 {
            return Err(FireyError::InvalidInput("point cloud affine hull is not two-dimensional".into()));
        }
        let poly = Self { vertices: lower, angles: OnceLock::new() };
        if poly.area() <= 0.0 {
            return Err(FireyError::InvalidInput("degenerate hull".into()));
        }
        Ok(poly)
    }

    /// Takes vertices already in counter-clockwise convex position.
    pub fn from_ccw(vertices: Vec<Vec2>) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(FireyError::InvalidInput("polygon needs three vertices".into()));
        }
        for i in 0..m {
            let a = vertices[i];
            let b = vertices[(i + 1) % m];
            let c = vertices[(i + 2) % m];
            if cross(sub(b, a), sub(c, b)) <= 0.0 {
                return Err(FireyError::InvalidInput(format!(
                    "vertices are not strictly convex and counter-clockwise at index {}",
                    (i + 1) % m
                )));
            }
        }
        Ok(Self { vertices, angles: OnceLock::new() })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        let m = self.vertices.len();
        0.5 * (0..m).map(|i| cross(self.vertices[i], self.vertices[(i + 1) % m])).sum::<f64>()
    }

    pub fn centroid(&self) -> Vec2 {
        let m = self.vertices.len();
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        // Shoelace relative to the first vertex keeps cancellation small.
        let o = self.vertices[0];
        for i in 0..m {
            let p = sub(self.vertices[i], o);
            let q = sub(self.vertices[(i + 1) % m], o);
            let c = cross(p, q);
            a2 += c;
            cx += (p[0] + q[0]) * c;
            cy += (p[1] + q[1]) * c;
        }
        [o[0] + cx / (3.0 * a2), o[1] + cy / (3.0 * a2)]
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().iter().map(|e| e.length).sum()
    }

    pub fn edges(&self) -> Vec<Edge> {
        let m = self.vertices.len();
        (0..m)
            .map(|i| {
                let a = self.vertices[i];
                let d = sub(self.vertices[(i + 1) % m], a);
                let len = d[0].hypot(d[1]);
                let normal = [d[1] / len, -d[0] / len];
                Edge { normal, offset: dot(normal, a), length: len }
            })
            .collect()
    }

    pub fn support(&self, u: Vec2) -> f64 {
        self.vertices.iter().map(|&v| dot(v, u)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn support_point(&self, u: Vec2) -> Vec2 {
        let mut best = self.vertices[0];
        let mut bv = dot(best, u);
        for &v in &self.vertices[1..] {
            let d = dot(v, u);
            if d > bv {
                bv = d;
                best = v;
            }
        }
        best
    }

    /// Support values at every grid node in O(N + M) by walking the vertex
    /// list alongside the sorted node directions.
    pub fn support_on_grid(&self, grid: &CircleGrid) -> Vec<f64> {
        let m = self.vertices.len();
        let u0 = grid.unit(0);
        let mut i = (0..m).max_by(|&a, &b| dot(self.vertices[a], u0).total_cmp(&dot(self.vertices[b], u0))).unwrap();
        (0..grid.len())
            .map(|k| {
                let u = grid.unit(k);
                // Look a few vertices ahead so rounding-level dips along
                // nearly collinear runs do not stop the walk early.
                let mut guard = 0;
                loop {
                    let cur = dot(self.vertices[i], u);
                    let ahead = (1..=LOOKAHEAD.min(m - 1))
                        .map(|d| (i + d) % m)
                        .max_by(|&a, &b| dot(self.vertices[a], u).total_cmp(&dot(self.vertices[b], u)))
                        .unwrap_or(i);
                    if guard >= m || dot(self.vertices[ahead], u) <= cur {
                        break cur;
                    }
                    i = ahead;
                    guard += 1;
                }
            })
            .collect()
    }

    pub fn translate(&self, a: Vec2) -> Self {
        Self { vertices: self.vertices.iter().map(|v| [v[0] + a[0], v[1] + a[1]]).collect(), angles: OnceLock::new() }
    }

    /// Image under the linear map with matrix rows `m`.
    pub fn linear_image(&self, m: [[f64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let mut v: Vec<Vec2> =
            self.vertices.iter().map(|p| [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]]).collect();
        if det < 0.0 {
            v.reverse();
        }
        Polygon::hull(&v)
    }

    /// Reflection x ↦ x − 2⟨x,e⟩e across the line e^⊥.
    pub fn reflect(&self, e: Vec2) -> Result<Self> {
        let m = [[1.0 - 2.0 * e[0] * e[0], -2.0 * e[0] * e[1]], [-2.0 * e[0] * e[1], 1.0 - 2.0 * e[1] * e[1]]];
        self.linear_image(m)
    }

    /// Smallest signed distance from `z` to an edge line; positive iff `z` is
    /// interior.
    pub fn interior_margin(&self, z: Vec2) -> f64 {
        self.edges().iter().map(|e| e.offset - dot(e.normal, z)).fold(f64::INFINITY, f64::min)
    }

    fn vertex_angles(&self) -> &[f64] {
        self.angles.get_or_init(|| {
            let mut out = Vec::with_capacity(self.vertices.len());
            let a0 = self.vertices[0][1].atan2(self.vertices[0][0]);
            out.push(a0);
            for v in &self.vertices[1..] {
                let mut a = v[1].atan2(v[0]);
                while a < *out.last().unwrap() {
                    a += TAU;
                }
                out.push(a);
            }
            out
        })
    }

    /// Radial function in the direction `dir` (unit vector). The origin must be
    /// interior.
    pub fn radial(&self, dir: Vec2) -> f64 {
        let ang = self.vertex_angles();
        let m = self.vertices.len();
        let a0 = ang[0];
        let beta = dir[1].atan2(dir[0]);
        let t = (beta - a0).rem_euclid(TAU) + a0;
        let i = ang.partition_point(|&a| a <= t).saturating_sub(1).min(m - 1);
        let a = self.vertices[i];
        let b = self.vertices[(i + 1) % m];
        let d = sub(b, a);
        let normal = [d[1], -d[0]];
        dot(normal, a) / dot(normal, dir)
    }

    /// Polar body with respect to the centre `z`, i.e. (P − z)°.
    pub fn polar(&self, z: Vec2) -> Result<Self> {
        let edges = self.edges();
        let mut v = Vec::with_capacity(edges.len());
        for e in &edges {
            let a = e.offset - dot(e.normal, z);
            if a <= 0.0 {
                return Err(FireyError::OriginNotInterior { node: 0, value: a });
            }
            v.push([e.normal[0] / a, e.normal[1] / a]);
        }
        Ok(Self { vertices: v, angles: OnceLock::new() })
    }

    /// Area of (P − z)° with its gradient and Hessian in z.
    pub fn polar_area_derivatives(&self, z: Vec2) -> Result<(f64, Vec2, [[f64; 2]; 2])> {
        let edges = self.edges();
        let m = edges.len();
        let a: Vec<f64> = edges.iter().map(|e| e.offset - dot(e.normal, z)).collect();
        if let Some((i, &v)) = a.iter().enumerate().find(|(_, &x)| x <= 0.0) {
            return Err(FireyError::OriginNotInterior { node: i, value: v });
        }
        let mut area = 0.0;
        let mut g = [0.0; 2];
        let mut h = [[0.0; 2]; 2];
        for i in 0..m {
            let j = (i + 1) % m;
            let (ni, nj) = (edges[i].normal, edges[j].normal);
            let q = 0.5 * cross(ni, nj) / (a[i] * a[j]);
            let w = [ni[0] / a[i] + nj[0] / a[j], ni[1] / a[i] + nj[1] / a[j]];
            area += q;
            for r in 0..2 {
                g[r] += q * w[r];
                for c in 0..2 {
                    h[r][c] += q * (w[r] * w[c] + ni[r] * ni[c] / (a[i] * a[i]) + nj[r] * nj[c] / (a[j] * a[j]));
                }
            }
        }
        Ok((area, g, h))
    }

    pub fn polar_area(&self, z: Vec2) -> Result<f64> {
        Ok(self.polar_area_derivatives(z)?.0)
    }

    /// Part of the polygon in the half-plane ⟨a, x⟩ ≤ c; `None` when empty or
    /// degenerate.
    pub fn clip(&self, a: Vec2, c: f64) -> Option<Self> {
        let m = self.vertices.len();
        let mut out: Vec<Vec2> = Vec::with_capacity(m + 2);
        for i in 0..m {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % m];
            let fp = dot(a, p) - c;
            let fq = dot(a, q) - c;
            if fp <= 0.0 {
                out.push(p);
            }
            if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
                let t = fp / (fp - fq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        Polygon::hull(&out).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polygon {
        Polygon::hull(&[[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [0.0, 0.5]]).unwrap()
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let p = Polygon::hull(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0], [1.0, 1.0]]).unwrap();
        assert_eq!(p.len(), 4);
        assert!((p.area() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_clouds_are_rejected() {
        assert!(Polygon::hull(&[]).is_err());
        assert!(Polygon::hull(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).is_err());
    }

    #[test]
    fn square_support_radial_and_centroid() {
        let s = square();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.support([r, r]) - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.radial([r, r]) - 2f64.sqrt()).abs() < 1e-14);
        assert!((s.radial([1.0, 0.0]) - 1.0).abs() < 1e-14);
        let c = s.centroid();
        assert!(c[0].abs() < 1e-15 && c[1].abs() < 1e-15);
    }

    #[test]
    fn triangle_centroid() {
        let t = Polygon::hull(&[[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]]).unwrap();
        let c = t.centroid();
        assert!((c[0] - 1.0).abs() < 1e-14 && (c[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn polar_of_square_is_diamond() {
        let d = square().polar([0.0, 0.0]).unwrap();
        assert!((d.area() - 2.0).abs() < 1e-14);
        assert!((d.support([1.0, 0.0]) - 1.0).abs() < 1e-15);
        let dd = d.polar([0.0, 0.0]).unwrap();
        assert!((dd.area() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn polar_area_gradient_matches_finite_differences() {
        let p = Polygon::hull(&[[-1.0, -0.7], [2.0, -0.5], [1.2, 1.5], [-0.8, 1.1]]).unwrap();
        let z = [0.1, -0.05];
        let (a, g, h) = p.polar_area_derivatives(z).unwrap();
        assert!((a - p.polar(z).unwrap().area()).abs() < 1e-12);
        let e = 1e-6;
        for r in 0..2 {
            let mut zp = z;
            let mut zm = z;
            zp[r] += e;
            zm[r] -= e;
            let (ap, gp, _) = p.polar_area_derivatives(zp).unwrap();
            let (am, gm, _) = p.polar_area_derivatives(zm).unwrap();
            assert!(((ap - am) / (2.0 * e) - g[r]).abs() < 1e-7);
            for c in 0..2 {
                assert!(((gp[c] - gm[c]) / (2.0 * e) - h[c][r]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn grid_support_matches_brute_force() {
        let p = Polygon::hull(&[[-1.0, -0.7], [2.0, -0.5], [1.2, 1.5], [-0.8, 1.1], [0.3, -1.2]]).unwrap();
        let g = CircleGrid::new(64).unwrap();
        let fast = p.support_on_grid(&g);
        for (k, f) in fast.iter().enumerate() {
            assert!((f - p.support(g.unit(k))).abs() < 1e-14);
        }
    }

    #[test]
    fn clipping_halves_a_square() {
        let half = square().clip([0.0, 1.0], 0.0).unwrap();
        assert!((half.area() - 2.0).abs() < 1e-14);
        assert!(square().clip([0.0, 1.0], -5.0).is_none());
    }
}

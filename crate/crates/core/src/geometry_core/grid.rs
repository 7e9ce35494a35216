use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{FireyError, Result};

/// Uniform periodic grid φ_k = 2πk/N on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleGrid {
    n: usize,
}

impl CircleGrid {
    /// Requires an even node count of at least 8 so that antipodes and the
    /// mirror φ ↦ π − φ are grid nodes.
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(FireyError::InvalidInput(format!("grid size must be even and at least 8, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn angle(&self, k: usize) -> f64 {
        TAU * (k as f64) / self.n as f64
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.angle(k)).collect()
    }

    pub fn weight(&self) -> f64 {
        self.step()
    }

    pub fn weights(&self) -> Vec<f64> {
        vec![self.step(); self.n]
    }

    pub fn unit(&self, k: usize) -> [f64; 2] {
        let (s, c) = self.angle(k).sin_cos();
        [c, s]
    }

    /// Index of π − φ_k.
    pub fn mirror_index(&self, k: usize) -> usize {
        (self.n / 2 + self.n - k % self.n) % self.n
    }

    /// Index of φ_k + π.
    pub fn antipode_index(&self, k: usize) -> usize {
        (k + self.n / 2) % self.n
    }

    /// True when φ_k is exactly ±π/2.
    pub fn is_pole(&self, k: usize) -> bool {
        4 * k == self.n || 4 * k == 3 * self.n
    }

    /// Exact sine of a node angle, with poles and the equator returned exactly.
    pub fn sin_at(&self, k: usize) -> f64 {
        if 4 * k == self.n {
            1.0
        } else if 4 * k == 3 * self.n {
            -1.0
        } else if 2 * k == self.n || k == 0 {
            0.0
        } else {
            self.angle(k).sin()
        }
    }

    /// Exact cosine of a node angle, zero at the poles.
    pub fn cos_at(&self, k: usize) -> f64 {
        if self.is_pole(k) {
            0.0
        } else if k == 0 {
            1.0
        } else if 2 * k == self.n {
            -1.0
        } else {
            self.angle(k).cos()
        }
    }

    /// Nearest node to an arbitrary angle.
    pub fn nearest_index(&self, phi: f64) -> usize {
        let x = phi.rem_euclid(TAU) / self.step();
        (x.round() as usize) % self.n
    }
}

/// Area of the unit sphere S^d.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => TAU,
        _ => TAU / (d as f64 - 1.0) * sphere_area(d - 2),
    }
}

/// Volume of the unit ball in ℝⁿ.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n - 1) / n as f64
}

fn binomial(p: usize, j: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..j {
        acc = acc * (p - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// ∫_{-π/2}^{π/2} cos(mφ) cos^p φ dφ, exact via the binomial expansion of cos^p.
pub fn cos_power_moment(m: usize, p: usize) -> f64 {
    let s = |q: i64| -> f64 {
        if q == 0 {
            PI
        } else {
            2.0 * (q as f64 * PI / 2.0).sin() / q as f64
        }
    };
    let mut acc = 0.0;
    for j in 0..=p {
        let k = p as i64 - 2 * j as i64;
        acc += binomial(p, j) * 0.5 * (s(m as i64 - k) + s(m as i64 + k));
    }
    acc / 2f64.powi(p as i32)
}

/// Quadrature for functions on S^{n-1} that depend only on the latitude φ
/// (angle from the equator in the profile plane).
///
/// For n = 2 this is the plain circle rule. For n ≥ 3 it integrates
/// F(φ)|cos φ|^{n-2} over the full circle, scaled by |S^{n-2}|/2, with weights
/// that are exact on trigonometric polynomials of degree below N/2.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    dim: usize,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn new(grid: &CircleGrid, dim: usize) -> Result<Self> {
        if !(2..=16).contains(&dim) {
            return Err(FireyError::InvalidInput(format!("ambient dimension must be in 2..=16, got {dim}")));
        }
        if dim == 2 {
            return Ok(Self { dim, weights: grid.weights() });
        }
        let n = grid.len();
        let p = dim - 2;
        let half = n / 2;
        // Fourier moments of |cos φ|^p over the full circle; odd modes vanish.
        let moments: Vec<f64> =
            (0..=half).map(|m| if m % 2 == 1 { 0.0 } else { 2.0 * cos_power_moment(m, p) }).collect();
        let scale = 0.5 * sphere_area(dim - 2) / n as f64;
        let weights = (0..n)
            .map(|j| {
                let phi = grid.angle(j);
                let mut acc = moments[0];
                for (m, mm) in moments.iter().enumerate().take(half).skip(1) {
                    if *mm != 0.0 {
                        acc += 2.0 * mm * (m as f64 * phi).cos();
                    }
                }
                acc += moments[half] * if j % 2 == 0 { 1.0 } else { -1.0 };
                scale * acc
            })
            .collect();
        Ok(Self { dim, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Σ w_k F_k in fixed index order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_fn(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.weights.iter().enumerate().map(|(k, w)| w * f(k)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_circumference() {
        let g = CircleGrid::new(1024).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - TAU).abs() < 1e-12);
    }

    #[test]
    fn rejects_odd_and_tiny_grids() {
        assert!(CircleGrid::new(7).is_err());
        assert!(CircleGrid::new(9).is_err());
        assert!(CircleGrid::new(4).is_err());
    }

    #[test]
    fn mirror_and_antipode() {
        let g = CircleGrid::new(16).unwrap();
        for k in 0..16 {
            let m = g.mirror_index(k);
            let d = (g.angle(m) - (PI - g.angle(k))).rem_euclid(TAU);
            assert!(d < 1e-12 || (TAU - d) < 1e-12);
            assert_eq!(g.antipode_index(g.antipode_index(k)), k);
        }
        assert!(g.is_pole(4) && g.is_pole(12) && !g.is_pole(0));
    }

    #[test]
    fn sphere_constants() {
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((ball_volume(2) - PI).abs() < 1e-14);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn cos_moments_match_closed_forms() {
        // ∫ cos φ dφ = 2, ∫ cos²φ dφ = π/2, ∫ cos(2φ) cos φ dφ = 2/3.
        assert!((cos_power_moment(0, 1) - 2.0).abs() < 1e-14);
        assert!((cos_power_moment(0, 2) - PI / 2.0).abs() < 1e-14);
        assert!((cos_power_moment(2, 1) - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_quadrature_integrates_latitude_polynomials() {
        let g = CircleGrid::new(256).unwrap();
        for dim in 3..=5 {
            let q = SphereQuadrature::new(&g, dim).unwrap();
            let total = q.integrate(&vec![1.0; 256]);
            assert!((total - sphere_area(dim - 1)).abs() < 1e-10, "dim {dim}");
            // ∫ x₂² dH = |S^{n-1}|/n
            let second = q.integrate_fn(|k| g.angle(k).sin().powi(2));
            assert!((second - sphere_area(dim - 1) / dim as f64).abs() < 1e-10);
        }
    }
}

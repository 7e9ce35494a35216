//! Fourier tools for periodic samples on a uniform circle grid.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::f64::consts::TAU;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Normalized DFT coefficients c_k = (1/N) Σ_j x_j e^{-ikφ_j}.
pub fn fourier_coeffs(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= inv);
    buf
}

fn inverse_real(coeffs: &mut [Complex64]) -> Vec<f64> {
    let n = coeffs.len();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(coeffs));
    coeffs.iter().map(|c| c.re).collect()
}

fn signed_mode(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Spectral derivative of the given order. Odd orders zero the Nyquist mode.
pub fn spectral_derivative(samples: &[f64], order: u32) -> Vec<f64> {
    let n = samples.len();
    let mut c = fourier_coeffs(samples);
    for (k, ck) in c.iter_mut().enumerate() {
        let m = signed_mode(k, n);
        if 2 * k == n && order % 2 == 1 {
            *ck = Complex64::new(0.0, 0.0);
            continue;
        }
        let factor = Complex64::new(0.0, m as f64).powu(order);
        *ck *= factor;
    }
    inverse_real(&mut c)
}

/// Applies the Fourier multiplier k ↦ m(k) to periodic samples.
pub fn fourier_multiplier(samples: &[f64], m: impl Fn(i64) -> f64) -> Vec<f64> {
    let n = samples.len();
    let mut c = fourier_coeffs(samples);
    for (k, ck) in c.iter_mut().enumerate() {
        *ck *= m(signed_mode(k, n));
    }
    inverse_real(&mut c)
}

/// Samples of the interpolant rotated by α, that is φ ↦ x(φ + α).
pub fn fourier_shift(samples: &[f64], alpha: f64) -> Vec<f64> {
    let n = samples.len();
    let mut c = fourier_coeffs(samples);
    for (k, ck) in c.iter_mut().enumerate() {
        let m = signed_mode(k, n) as f64;
        if 2 * k == n {
            *ck *= (m * alpha).cos();
        } else {
            *ck *= Complex64::from_polar(1.0, m * alpha);
        }
    }
    inverse_real(&mut c)
}

/// Fourth-order centered finite differences (five-point stencils) on a
/// periodic grid with spacing `step`. Supports orders 1 and 2.
pub fn fd_derivative(samples: &[f64], step: f64, order: u32) -> Vec<f64> {
    let n = samples.len();
    let at = |k: isize| samples[k.rem_euclid(n as isize) as usize];
    (0..n as isize)
        .map(|k| match order {
            1 => (-at(k + 2) + 8.0 * at(k + 1) - 8.0 * at(k - 1) + at(k - 2)) / (12.0 * step),
            2 => (-at(k + 2) + 16.0 * at(k + 1) - 30.0 * at(k) + 16.0 * at(k - 1) - at(k - 2)) / (12.0 * step * step),
            _ => panic!("finite differences only support orders 1 and 2"),
        })
        .collect()
}

/// Band-limited resampling of periodic data onto `m` uniform nodes.
pub fn resample(samples: &[f64], m: usize) -> Vec<f64> {
    let n = samples.len();
    let c = fourier_coeffs(samples);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let half = n.min(m) / 2;
    for k in 0..n {
        let s = signed_mode(k, n);
        if s.unsigned_abs() as usize > half {
            continue;
        }
        let mut v = c[k];
        if s.unsigned_abs() as usize == half && 2 * half == n {
            // split the Nyquist mode symmetrically
            v *= 0.5;
            let idx_pos = half;
            let idx_neg = (m - half) % m;
            out[idx_pos] += v;
            out[idx_neg] += v;
            continue;
        }
        let idx = if s >= 0 { s as usize } else { (m as i64 + s) as usize };
        out[idx] += v;
    }
    inverse_real(&mut out).into_iter().collect()
}

/// Relative size below which trailing Fourier modes are FFT roundoff.
const TAIL_TOL: f64 = 4.0 * f64::EPSILON;

/// Real trigonometric interpolant
/// a₀ + Σ_{k<N/2} (a_k cos kφ + b_k sin kφ) + a_{N/2} cos(Nφ/2).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrigInterp {
    a: Vec<f64>,
    b: Vec<f64>,
    nyquist: f64,
    half: usize,
}

impl TrigInterp {
    pub fn new(samples: &[f64]) -> Self {
        let n = samples.len();
        let c = fourier_coeffs(samples);
        let half = n / 2;
        let mut a = Vec::with_capacity(half);
        let mut b = Vec::with_capacity(half);
        a.push(c[0].re);
        b.push(0.0);
        for ck in c.iter().take(half).skip(1) {
            a.push(2.0 * ck.re);
            b.push(-2.0 * ck.im);
        }
        let nyquist = if n % 2 == 0 { c[half].re } else { 0.0 };
        // Drop the negligible tail so pointwise evaluation stays cheap.
        let scale = a.iter().chain(b.iter()).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let mut last = a.len();
        while last > 1 && a[last - 1].abs() + b[last - 1].abs() < TAIL_TOL * scale {
            last -= 1;
        }
        let nyquist = if nyquist.abs() < TAIL_TOL * scale { 0.0 } else { nyquist };
        if nyquist != 0.0 {
            last = a.len();
        }
        a.truncate(last);
        b.truncate(last);
        Self { a, b, nyquist, half }
    }

    pub fn mean(&self) -> f64 {
        self.a[0]
    }

    /// First-harmonic coefficients (a₁, b₁).
    pub fn first_harmonic(&self) -> (f64, f64) {
        (self.a.get(1).copied().unwrap_or(0.0), self.b.get(1).copied().unwrap_or(0.0))
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.eval3(phi).0
    }

    /// Value, first and second derivative at φ.
    pub fn eval3(&self, phi: f64) -> (f64, f64, f64) {
        let (s1, c1) = phi.sin_cos();
        let mut v = self.a[0];
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        let (mut c, mut s) = (1.0f64, 0.0f64);
        for k in 1..self.a.len() {
            if k % 64 == 0 {
                let (sk, ck) = (k as f64 * phi).sin_cos();
                c = ck;
                s = sk;
            } else {
                let cn = c * c1 - s * s1;
                s = s * c1 + c * s1;
                c = cn;
            }
            let kf = k as f64;
            let (ak, bk) = (self.a[k], self.b[k]);
            v += ak * c + bk * s;
            d1 += kf * (bk * c - ak * s);
            d2 -= kf * kf * (ak * c + bk * s);
        }
        if self.nyquist != 0.0 {
            let m = self.half as f64;
            let (sn, cn) = (m * phi).sin_cos();
            v += self.nyquist * cn;
            d1 -= self.nyquist * m * sn;
            d2 -= self.nyquist * m * m * cn;
        }
        (v, d1, d2)
    }
}

/// Angles of a uniform grid with `n` nodes (helper for resampled data).
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

//! The class 𝒜(n): tabulated G, membership certificates, the extension to
//! (0, Θ] with its F representation, and the ε-gluing family.

use serde::{Deserialize, Serialize};

use crate::error::{FireyError, Result};

/// Sample count used when a preset or construction is tabulated.
pub const DEFAULT_SAMPLES: usize = 4096;

/// Window length of the "positive total increase" test.
const WINDOW: usize = 16;

/// A positive function of the support value.
pub trait GFunction: Send + Sync {
    fn eval(&self, theta: f64) -> f64;
    fn deriv(&self, theta: f64) -> f64;
    /// Closed interval on which `eval` is meaningful.
    fn domain(&self) -> (f64, f64);
}

/// Named analytic G's.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Preset {
    Power(f64),
    Const(f64),
    /// 0.5 + θ + 0.25·tanh(4(θ − 1)): smooth, positive on (0, ∞), strictly increasing.
    IncreasingDemo,
}

impl Preset {
    /// Parses "power:p", "const:c" or "increasing:demo".
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| FireyError::InvalidInput(format!("G preset '{s}' must look like kind:value")))?;
        let num = || {
            arg.trim()
                .parse::<f64>()
                .map_err(|_| FireyError::InvalidInput(format!("bad numeric argument in G preset '{s}'")))
        };
        match kind.trim() {
            "power" => Ok(Preset::Power(num()?)),
            "const" => {
                let c = num()?;
                if c <= 0.0 {
                    return Err(FireyError::InvalidInput("const G must be positive".into()));
                }
                Ok(Preset::Const(c))
            }
            "increasing" if arg.trim() == "demo" => Ok(Preset::IncreasingDemo),
            _ => Err(FireyError::InvalidInput(format!("unknown G preset '{s}'"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Preset::Power(p) => format!("power:{p}"),
            Preset::Const(c) => format!("const:{c}"),
            Preset::IncreasingDemo => "increasing:demo".into(),
        }
    }

    /// Samples on [c1, c2] with exact slopes.
    pub fn tabulate(&self, n: usize, c1: f64, c2: f64, samples: usize) -> Result<GTab> {
        GTab::from_fn_with_deriv(n, c1, c2, samples, |t| self.eval(t), |t| self.deriv(t))
    }
}

impl GFunction for Preset {
    fn eval(&self, t: f64) -> f64 {
        match *self {
            Preset::Power(p) => t.powf(p),
            Preset::Const(c) => c,
            Preset::IncreasingDemo => 0.5 + t + 0.25 * (4.0 * (t - 1.0)).tanh(),
        }
    }

    fn deriv(&self, t: f64) -> f64 {
        match *self {
            Preset::Power(p) => p * t.powf(p - 1.0),
            Preset::Const(_) => 0.0,
            Preset::IncreasingDemo => {
                let th = (4.0 * (t - 1.0)).tanh();
                1.0 + (1.0 - th * th)
            }
        }
    }

    fn domain(&self) -> (f64, f64) {
        match self {
            Preset::Const(_) => (f64::NEG_INFINITY, f64::INFINITY),
            _ => (f64::MIN_POSITIVE, f64::INFINITY),
        }
    }
}

/// Integrals of the cubic Hermite basis over [0, s].
fn hermite_basis_integrals(s: f64) -> [f64; 4] {
    let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
    [s4 / 2.0 - s3 + s, s4 / 4.0 - 2.0 * s3 / 3.0 + s2 / 2.0, -s4 / 2.0 + s3, s4 / 4.0 - s3 / 3.0]
}

/// G sampled on a uniform θ-grid over [c1, c2], interpolated by cubic
/// Hermite splines. H is the exact integral of that spline with H(c1) = 0,
/// i.e. the trapezoid rule plus its endpoint-slope correction.
#[derive(Clone, Debug)]
pub struct GTab {
    n: usize,
    c1: f64,
    c2: f64,
    g: Vec<f64>,
    slopes: Vec<f64>,
    h: Vec<f64>,
    explicit_slopes: bool,
}

#[derive(Serialize, Deserialize)]
struct GTabJson {
    n: usize,
    c1: f64,
    c2: f64,
    #[serde(rename = "G")]
    g: Vec<f64>,
    #[serde(rename = "dG", default, skip_serializing_if = "Option::is_none")]
    dg: Option<Vec<f64>>,
}

impl Serialize for GTab {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GTabJson {
            n: self.n,
            c1: self.c1,
            c2: self.c2,
            g: self.g.clone(),
            dg: self.explicit_slopes.then(|| self.slopes.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GTab {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = GTabJson::deserialize(d)?;
        let r = match j.dg {
            Some(dg) => GTab::from_samples_and_slopes(j.n, j.c1, j.c2, j.g, dg),
            None => GTab::from_samples(j.n, j.c1, j.c2, j.g),
        };
        r.map_err(serde::de::Error::custom)
    }
}

/// Fourth-order central slopes in the interior, one-sided at the ends.
fn fd_slopes(g: &[f64], step: f64) -> Vec<f64> {
    let m = g.len();
    let mut d = vec![0.0; m];
    if m < 5 {
        for k in 0..m {
            let (a, b) = (k.saturating_sub(1), (k + 1).min(m - 1));
            d[k] = (g[b] - g[a]) / ((b - a) as f64 * step);
        }
        return d;
    }
    for k in 2..m - 2 {
        d[k] = (g[k - 2] - 8.0 * g[k - 1] + 8.0 * g[k + 1] - g[k + 2]) / (12.0 * step);
    }
    d[1] = (-3.0 * g[0] - 10.0 * g[1] + 18.0 * g[2] - 6.0 * g[3] + g[4]) / (12.0 * step);
    d[0] = (-25.0 * g[0] + 48.0 * g[1] - 36.0 * g[2] + 16.0 * g[3] - 3.0 * g[4]) / (12.0 * step);
    d[m - 2] = -(-3.0 * g[m - 1] - 10.0 * g[m - 2] + 18.0 * g[m - 3] - 6.0 * g[m - 4] + g[m - 5]) / (12.0 * step);
    d[m - 1] =
        -(-25.0 * g[m - 1] + 48.0 * g[m - 2] - 36.0 * g[m - 3] + 16.0 * g[m - 4] - 3.0 * g[m - 5]) / (12.0 * step);
    d
}

impl GTab {
    pub fn from_samples(n: usize, c1: f64, c2: f64, g: Vec<f64>) -> Result<Self> {
        Self::validate(n, c1, c2, &g)?;
        let step = (c2 - c1) / (g.len() - 1) as f64;
        let slopes = fd_slopes(&g, step);
        Ok(Self::assemble(n, c1, c2, g, slopes, false))
    }

    pub fn from_samples_and_slopes(n: usize, c1: f64, c2: f64, g: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        Self::validate(n, c1, c2, &g)?;
        if slopes.len() != g.len() || slopes.iter().any(|s| !s.is_finite()) {
            return Err(FireyError::InvalidInput("slope table must match G samples and be finite".into()));
        }
        Ok(Self::assemble(n, c1, c2, g, slopes, true))
    }

    pub fn from_fn(n: usize, c1: f64, c2: f64, samples: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let g = Self::nodes(c1, c2, samples).map(f).collect();
        Self::from_samples(n, c1, c2, g)
    }

    pub fn from_fn_with_deriv(
        n: usize,
        c1: f64,
        c2: f64,
        samples: usize,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let g = Self::nodes(c1, c2, samples).map(&f).collect();
        let d = Self::nodes(c1, c2, samples).map(&df).collect();
        Self::from_samples_and_slopes(n, c1, c2, g, d)
    }

    fn nodes(c1: f64, c2: f64, m: usize) -> impl Iterator<Item = f64> {
        let m = m.max(2);
        let step = (c2 - c1) / (m - 1) as f64;
        (0..m).map(move |k| if k + 1 == m { c2 } else { c1 + step * k as f64 })
    }

    fn validate(n: usize, c1: f64, c2: f64, g: &[f64]) -> Result<()> {
        if n < 1 {
            return Err(FireyError::InvalidInput("dimension parameter n must be at least 1".into()));
        }
        if !(c1 > 0.0 && c2 > c1 && c2.is_finite()) {
            return Err(FireyError::InvalidInput(format!("G domain must satisfy 0 < c1 < c2, got [{c1}, {c2}]")));
        }
        if g.len() < 2 {
            return Err(FireyError::InvalidInput("G table needs at least two samples".into()));
        }
        if let Some(k) = g.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(FireyError::InvalidInput(format!("G must be positive and finite; sample {k} is {}", g[k])));
        }
        Ok(())
    }

    fn assemble(n: usize, c1: f64, c2: f64, g: Vec<f64>, slopes: Vec<f64>, explicit: bool) -> Self {
        let step = (c2 - c1) / (g.len() - 1) as f64;
        let mut h = vec![0.0; g.len()];
        for k in 0..g.len() - 1 {
            h[k + 1] = h[k] + step * (g[k] + g[k + 1]) / 2.0 + step * step * (slopes[k] - slopes[k + 1]) / 12.0;
        }
        GTab { n, c1, c2, g, slopes, h, explicit_slopes: explicit }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Same table with another dimension parameter.
    pub fn with_dimension(&self, n: usize) -> Self {
        GTab { n, ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.c2 - self.c1) / (self.g.len() - 1) as f64
    }

    pub fn theta(&self, k: usize) -> f64 {
        if k + 1 == self.g.len() {
            self.c2
        } else {
            self.c1 + self.step() * k as f64
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.g
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Antiderivative samples with H(c1) = 0.
    pub fn antiderivative_samples(&self) -> &[f64] {
        &self.h
    }

    /// Cell index and local coordinate s ∈ [0, 1].
    fn locate(&self, t: f64) -> (usize, f64) {
        let m = self.g.len();
        let x = ((t - self.c1) / self.step()).clamp(0.0, (m - 1) as f64);
        let k = (x.floor() as usize).min(m - 2);
        (k, x - k as f64)
    }

    /// Antiderivative H(θ) with H(c1) = 0; clamped to the domain.
    pub fn antiderivative(&self, t: f64) -> f64 {
        let (k, s) = self.locate(t);
        let step = self.step();
        let i = hermite_basis_integrals(s);
        self.h[k]
            + step
                * (self.g[k] * i[0]
                    + step * self.slopes[k] * i[1]
                    + self.g[k + 1] * i[2]
                    + step * self.slopes[k + 1] * i[3])
    }

    pub fn max_sample(&self) -> f64 {
        self.g.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_sample(&self) -> f64 {
        self.g.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Tabulates an arbitrary G on [c1, c2].
    pub fn tabulate(g: &dyn GFunction, n: usize, c1: f64, c2: f64, samples: usize) -> Result<Self> {
        Self::from_fn_with_deriv(n, c1, c2, samples, |t| g.eval(t), |t| g.deriv(t))
    }
}

impl GFunction for GTab {
    fn eval(&self, t: f64) -> f64 {
        let (k, s) = self.locate(t);
        let step = self.step();
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.g[k]
            + (s3 - 2.0 * s2 + s) * step * self.slopes[k]
            + (-2.0 * s3 + 3.0 * s2) * self.g[k + 1]
            + (s3 - s2) * step * self.slopes[k + 1]
    }

    fn deriv(&self, t: f64) -> f64 {
        let (k, s) = self.locate(t);
        let step = self.step();
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * self.g[k] + (-6.0 * s2 + 6.0 * s) * self.g[k + 1]) / step
            + (3.0 * s2 - 4.0 * s + 1.0) * self.slopes[k]
            + (3.0 * s2 - 2.0 * s) * self.slopes[k + 1]
    }

    fn domain(&self) -> (f64, f64) {
        (self.c1, self.c2)
    }
}

/// How a table failed membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// θG + nH decreases on a cell.
    Decreasing,
    /// θG + nH does not grow across a whole window.
    Flat,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AnViolation {
    pub kind: ViolationKind,
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Increase of θG + nH over the violating interval.
    pub increase: f64,
}

/// Outcome of the membership test for θG + nH strictly increasing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnCertificate {
    pub n: usize,
    pub pass: bool,
    pub min_forward_diff: f64,
    pub min_window_increase: f64,
    /// min of θG′ + (n+1)G over the nodes (the pointwise sufficient condition).
    pub sufficient_min: f64,
    pub violation: Option<AnViolation>,
}

/// Certifies that θG + nH is strictly increasing across the samples:
/// no forward difference below −10⁻¹² (scaled) and a positive increase on
/// every window of 16 samples.
pub fn check_an(g: &GTab) -> AnCertificate {
    let n = g.n as f64;
    let f: Vec<f64> = (0..g.len()).map(|k| g.theta(k) * g.g[k] + n * g.h[k]).collect();
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let dec_tol = 1e-12 * scale;
    let flat_tol = 1e-10 * scale;
    let mut min_diff = f64::INFINITY;
    let mut violation = None;
    for k in 0..f.len() - 1 {
        let d = f[k + 1] - f[k];
        min_diff = min_diff.min(d);
        if violation.is_none() && d < -dec_tol {
            violation = Some(AnViolation {
                kind: ViolationKind::Decreasing,
                theta_lo: g.theta(k),
                theta_hi: g.theta(k + 1),
                increase: d,
            });
        }
    }
    let w = WINDOW.min(f.len() - 1);
    let mut min_win = f64::INFINITY;
    for k in 0..f.len() - w {
        let d = f[k + w] - f[k];
        min_win = min_win.min(d);
        if violation.is_none() && d <= flat_tol {
            violation = Some(AnViolation {
                kind: ViolationKind::Flat,
                theta_lo: g.theta(k),
                theta_hi: g.theta(k + w),
                increase: d,
            });
        }
    }
    let sufficient_min =
        (0..g.len()).map(|k| g.theta(k) * g.slopes[k] + (n + 1.0) * g.g[k]).fold(f64::INFINITY, f64::min);
    AnCertificate {
        n: g.n,
        pass: violation.is_none(),
        min_forward_diff: min_diff,
        min_window_increase: min_win,
        sufficient_min,
        violation,
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub(crate) fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

/// Ḡ on (0, Θ]: G on [a, b], G(a) below a and G(b) above b, together
/// with H̄ and F = θḠ + nH̄.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Extension {
    pub base: GTab,
    pub theta_max: f64,
    pub certificate: AnCertificate,
}

impl Extension {
    pub fn n(&self) -> usize {
        self.base.n
    }

    fn ab(&self) -> (f64, f64, f64, f64) {
        let (a, b) = self.base.domain();
        (a, b, self.base.g[0], *self.base.g.last().unwrap())
    }

    /// H̄: θG(a) below a, H − H(a) + aG(a) on [a, b], linear of slope G(b) above.
    pub fn hbar(&self, t: f64) -> f64 {
        let (a, b, ga, gb) = self.ab();
        if t < a {
            t * ga
        } else if t <= b {
            self.base.antiderivative(t) + a * ga
        } else {
            (t - b) * gb + *self.base.h.last().unwrap() + a * ga
        }
    }

    /// F(θ) = θḠ(θ) + nH̄(θ), with F(0) = 0.
    pub fn f(&self, t: f64) -> f64 {
        t * self.eval(t) + self.n() as f64 * self.hbar(t)
    }

    /// I(θ) = θ⁻ⁿ∫₀^θ s^{n−1}F(s)ds by Gauss–Legendre on every spline cell.
    /// Exact up to rounding for n ≤ 12 because F is piecewise polynomial.
    pub fn moment_identity(&self, theta: f64) -> f64 {
        let n = self.n();
        let (x, w) = gauss_legendre(8);
        let mut breaks = vec![0.0];
        for k in 0..self.base.len() {
            let t = self.base.theta(k);
            if t < theta {
                breaks.push(t);
            }
        }
        breaks.push(theta);
        let mut total = 0.0;
        for pair in breaks.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if hi <= lo {
                continue;
            }
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (xi, wi) in x.iter().zip(&w) {
                let s = mid + half * xi;
                total += wi * half * s.powi(n as i32 - 1) * self.f(s);
            }
        }
        total / theta.powi(n as i32)
    }
}

impl GFunction for Extension {
    fn eval(&self, t: f64) -> f64 {
        let (a, b, ga, gb) = self.ab();
        if t < a {
            ga
        } else if t > b {
            gb
        } else {
            self.base.eval(t)
        }
    }

    fn deriv(&self, t: f64) -> f64 {
        let (a, b, _, _) = self.ab();
        if t < a || t > b {
            0.0
        } else {
            self.base.deriv(t)
        }
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, self.theta_max)
    }
}

/// Extends a certified G on [a, b] to (0, Θ].
pub fn extend_an(g: &GTab, theta_max: f64) -> Result<Extension> {
    let certificate = check_an(g);
    if !certificate.pass {
        return Err(FireyError::Precondition(format!(
            "G is not certified in the class on [{}, {}]: {:?}",
            g.c1, g.c2, certificate.violation
        )));
    }
    if !(theta_max >= g.c2) {
        return Err(FireyError::InvalidInput(format!("extension bound {theta_max} is below the table end {}", g.c2)));
    }
    Ok(Extension { base: g.clone(), theta_max, certificate })
}

/// G_ε together with the chosen inner breakpoints and its certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GluedG {
    pub g: GTab,
    pub c1_prime: f64,
    pub c2_prime: f64,
    pub eps: f64,
    pub certificate: AnCertificate,
    /// max G_ε over the samples, to compare with max{a₂, max G}.
    pub sup: f64,
}

/// Linear ramps on [c1, c1′] and [c2′, c2] joining a₁, a₂ to G, with G kept
/// on (c1′, c2′). The breakpoints are the midpoints c1 + ε/2 and c2 − ε/2
/// snapped to the sample grid, moved toward cᵢ if the value constraint fails.
pub fn glue_g_eps(g: &GTab, c1: f64, c2: f64, a1: f64, a2: f64, eps: f64) -> Result<GluedG> {
    let (lo, hi) = g.domain();
    let slack = 1e-12 * hi;
    if !(c1 < c2 && c1 >= lo - slack && c2 <= hi + slack) {
        return Err(FireyError::Precondition(format!(
            "[c1, c2] = [{c1}, {c2}] must be a nonempty subinterval of the G domain [{lo}, {hi}]"
        )));
    }
    if !(a1 > 0.0 && a2 > a1) {
        return Err(FireyError::Precondition(format!("need 0 < a1 < a2, got a1 = {a1}, a2 = {a2}")));
    }
    let (g1, g2) = (g.eval(c1), g.eval(c2));
    let rel = 1e-12 * g1.abs().max(g2.abs()).max(1.0);
    if g1 < a1 - rel {
        return Err(FireyError::Precondition(format!("G(c1) >= a1 fails: G(c1) = {g1}, a1 = {a1}")));
    }
    if g2 > a2 + rel {
        return Err(FireyError::Precondition(format!("G(c2) <= a2 fails: G(c2) = {g2}, a2 = {a2}")));
    }
    if !(eps > 0.0 && c1 + eps < c2 - eps) {
        return Err(FireyError::Precondition(format!("need 0 < eps and c1 + eps < c2 - eps, got eps = {eps}")));
    }
    let m = g.len();
    let step = (c2 - c1) / (m - 1) as f64;
    let theta: Vec<f64> = (0..m).map(|k| if k + 1 == m { c2 } else { c1 + step * k as f64 }).collect();
    let cells_eps = eps / step;
    if cells_eps < 2.0 {
        return Err(FireyError::Precondition(format!(
            "eps = {eps} is below two sample cells ({step}); refine the table"
        )));
    }
    let max_inner = (cells_eps.ceil() as usize - 1).max(1);
    let mid = ((0.5 * cells_eps).round() as usize).clamp(1, max_inner);
    let k1 = if (g1 - a1).abs() <= rel {
        0
    } else {
        (1..=mid)
            .rev()
            .find(|&k| g.eval(theta[k]) >= a1)
            .ok_or_else(|| FireyError::Precondition("no admissible c1' with G(c1') >= a1 near c1".into()))?
    };
    let k2 = if (g2 - a2).abs() <= rel {
        m - 1
    } else {
        (1..=mid)
            .rev()
            .map(|d| m - 1 - d)
            .find(|&k| g.eval(theta[k]) <= a2)
            .ok_or_else(|| FireyError::Precondition("no admissible c2' with G(c2') <= a2 near c2".into()))?
    };
    let (c1p, c2p) = (theta[k1], theta[k2]);
    let (gc1, gc2) = (g.eval(c1p), g.eval(c2p));
    let ramp1 = if k1 > 0 { (gc1 - a1) / (c1p - c1) } else { 0.0 };
    let ramp2 = if k2 < m - 1 { (a2 - gc2) / (c2 - c2p) } else { 0.0 };
    let mut vals = vec![0.0; m];
    let mut slopes = vec![0.0; m];
    for k in 0..m {
        let t = theta[k];
        if k < k1 {
            vals[k] = a1 + ramp1 * (t - c1);
            slopes[k] = ramp1;
        } else if k > k2 {
            vals[k] = gc2 + ramp2 * (t - c2p);
            slopes[k] = ramp2;
        } else {
            vals[k] = g.eval(t);
            slopes[k] = g.deriv(t);
        }
    }
    if k1 > 0 {
        vals[k1] = gc1;
        slopes[k1] = 0.5 * (ramp1 + g.deriv(c1p));
    }
    if k2 < m - 1 {
        vals[k2] = gc2;
        slopes[k2] = 0.5 * (ramp2 + g.deriv(c2p));
    }
    vals[0] = if k1 > 0 { a1 } else { vals[0] };
    vals[m - 1] = if k2 < m - 1 { a2 } else { vals[m - 1] };
    let glued = GTab::from_samples_and_slopes(g.n, c1, c2, vals, slopes)?;
    let certificate = check_an(&glued);
    if !certificate.pass {
        log::warn!("glued G fails the class certificate: {:?}", certificate.violation);
    }
    let sup = glued.max_sample();
    Ok(GluedG { g: glued, c1_prime: c1p, c2_prime: c2p, eps, certificate, sup })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        assert_eq!(Preset::parse("power:-3").unwrap(), Preset::Power(-3.0));
        assert_eq!(Preset::parse("const:2").unwrap(), Preset::Const(2.0));
        assert_eq!(Preset::parse("increasing:demo").unwrap(), Preset::IncreasingDemo);
        assert!(Preset::parse("power").is_err());
        assert!(Preset::parse("wobble:1").is_err());
        assert!(Preset::parse("const:-1").is_err());
    }

    #[test]
    fn hermite_reproduces_cubics_and_their_integrals() {
        let f = |t: f64| 1.0 + t - 0.3 * t * t + 0.05 * t * t * t;
        let df = |t: f64| 1.0 - 0.6 * t + 0.15 * t * t;
        let tab = GTab::from_fn_with_deriv(2, 1.0, 2.0, 11, f, df).unwrap();
        let big_f = |t: f64| t + t * t / 2.0 - 0.1 * t.powi(3) + 0.0125 * t.powi(4);
        for &t in &[1.0, 1.137, 1.5, 1.999, 2.0] {
            assert!((tab.eval(t) - f(t)).abs() < 1e-14);
            assert!((tab.deriv(t) - df(t)).abs() < 1e-13);
            assert!((tab.antiderivative(t) - (big_f(t) - big_f(1.0))).abs() < 1e-14);
        }
    }

    #[test]
    fn power_laws_above_threshold_pass() {
        for n in 2..=4 {
            for &p in &[-(n as f64) - 0.5, -1.0, 0.0, 0.5, 3.0] {
                let cert = check_an(&Preset::Power(p).tabulate(n, 0.5, 2.0, DEFAULT_SAMPLES).unwrap());
                assert!(cert.pass, "n={n} p={p}: {cert:?}");
            }
        }
    }

    #[test]
    fn critical_power_is_flat() {
        for n in 2..=3 {
            let p = -(n as f64) - 1.0;
            let cert = check_an(&Preset::Power(p).tabulate(n, 0.5, 2.0, DEFAULT_SAMPLES).unwrap());
            let v = cert.violation.expect("must fail");
            assert_eq!(v.kind, ViolationKind::Flat);
        }
    }

    #[test]
    fn supercritical_power_decreases() {
        let cert = check_an(&Preset::Power(-5.0).tabulate(2, 0.5, 2.0, DEFAULT_SAMPLES).unwrap());
        assert_eq!(cert.violation.unwrap().kind, ViolationKind::Decreasing);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_extension_has_linear_f() {
        let tab = Preset::Const(1.5).tabulate(3, 1.0, 2.0, 64).unwrap();
        let ext = extend_an(&tab, 5.0).unwrap();
        for &t in &[0.1, 1.0, 1.7, 4.0] {
            assert_eq!(ext.eval(t), 1.5);
            assert!((ext.f(t) - 4.0 * 1.5 * t).abs() < 1e-12);
        }
        assert_eq!(ext.f(0.0), 0.0);
    }

    #[test]
    fn moment_identity_matches_hbar() {
        let tab = Preset::Power(1.0).tabulate(2, 1.0, 2.0, 257).unwrap();
        let ext = extend_an(&tab, 4.0).unwrap();
        for &t in &[0.3, 1.0, 1.41, 2.0, 3.7] {
            assert!((ext.moment_identity(t) - ext.hbar(t)).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn glue_is_identity_when_endpoints_match() {
        let tab = Preset::IncreasingDemo.tabulate(2, 1.0, 2.0, 1025).unwrap();
        let out = glue_g_eps(&tab, 1.0, 2.0, tab.eval(1.0), tab.eval(2.0), 0.1).unwrap();
        assert_eq!(out.g.samples(), tab.samples());
        assert_eq!((out.c1_prime, out.c2_prime), (1.0, 2.0));
    }

    #[test]
    fn glue_ramps_constant_g() {
        let tab = Preset::Const(1.0).tabulate(2, 1.0, 2.0, 4097).unwrap();
        let out = glue_g_eps(&tab, 1.0, 2.0, 0.5, 2.0, 0.1).unwrap();
        assert!(out.certificate.pass);
        assert_eq!(out.g.eval(1.0), 0.5);
        assert_eq!(out.g.eval(2.0), 2.0);
        assert!(out.c1_prime > 1.0 && out.c1_prime < 1.1);
        for k in 0..out.g.len() {
            let t = out.g.theta(k);
            if (1.1..=1.9).contains(&t) {
                assert_eq!(out.g.samples()[k], 1.0);
            }
        }
        assert!(out.sup <= 2.0);
    }

    #[test]
    fn glue_names_failed_hypothesis() {
        let tab = Preset::Const(1.0).tabulate(2, 1.0, 2.0, 1025).unwrap();
        let e = glue_g_eps(&tab, 1.0, 2.0, 1.5, 2.0, 0.1).unwrap_err();
        assert!(e.to_string().contains("G(c1) >= a1"));
        let e = glue_g_eps(&tab, 1.0, 2.0, 0.5, 0.8, 0.1).unwrap_err();
        assert!(e.to_string().contains("G(c2) <= a2"));
    }

    #[test]
    fn json_round_trip() {
        let tab = Preset::Power(0.5).tabulate(3, 0.5, 1.5, 33).unwrap();
        let s = serde_json::to_string(&tab).unwrap();
        assert!(s.contains("\"c1\"") && s.contains("\"G\""));
        let back: GTab = serde_json::from_str(&s).unwrap();
        assert_eq!(back.samples(), tab.samples());
        let bare: GTab = serde_json::from_str(r#"{"n":2,"c1":1.0,"c2":2.0,"G":[1.0,1.0,1.0,1.0,1.0]}"#).unwrap();
        assert!((bare.antiderivative(2.0) - 1.0).abs() < 1e-15);
    }
}

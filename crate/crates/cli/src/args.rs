//! Command-line grammar.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "firey-lab", version, about = "Numerical laboratory for det(D^2 h + h I) = G(h) on the sphere")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Grid size: a power of two, at least 256. Bodies are resampled to it.
    #[arg(long = "grid-n", global = true)]
    pub grid_n: Option<usize>,
    /// Tolerance of the check performed by the subcommand.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "firey-out")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Diff {
    Spectral,
    Fd,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Write a reference body (ball or ellipse) as body JSON.
    Body(BodyArgs),
    /// Density of the surface area measure.
    Density(DensityArgs),
    /// Polar body with the duality check rho * h_polar = 1.
    Polar(BodyInput),
    /// Steiner symmetral, or a member of the shadow system.
    Steiner(SteinerArgs),
    /// Santalo point, polar area and the volume product.
    Santalo(BodyInput),
    /// Membership certificate for theta G + n H strictly increasing.
    CheckAn(CheckAnArgs),
    /// Gluing constructions: spherical caps, tangency gluing, central symmetrization.
    Glue(GlueArgs),
    /// Build and verify the translated non-spherical solution.
    Counterexample(CounterexampleArgs),
    /// Periodic planar solver h'' + h = G(h).
    Solve2d(Solve2dArgs),
    /// Residual of f_K = G(h_K) for a body file.
    Verify(VerifyArgs),
    /// Convexity of reciprocal polar volumes along a shadow system.
    ProbeMr(ProbeMrArgs),
    /// Run the acceptance criteria, or re-render their table from earlier manifests.
    Report(ReportArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Ball,
    Ellipse,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BodyArgs {
    #[arg(long, value_enum, default_value_t = Shape::Ball)]
    pub shape: Shape,
    /// Ambient dimension; n >= 3 gives a body of revolution about the x2-axis.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Radius of the ball.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Ellipse semi-axes.
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Translation along x2.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub shift: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BodyInput {
    /// Body JSON or point-cloud JSON.
    #[arg(long)]
    pub body: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    pub input: BodyInput,
    #[arg(long, value_enum, default_value_t = Diff::Spectral)]
    pub diff: Diff,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SteinerArgs {
    #[command(flatten)]
    pub input: BodyInput,
    /// Direction angle of e in radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub direction: f64,
    /// Shadow-system parameter in [-1, 1]; 0 gives the Steiner symmetral.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CheckAnArgs {
    /// Preset (power:p, const:c, increasing:demo) or GTab JSON path.
    #[arg(long = "G")]
    pub g: String,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Tabulation interval for presets.
    #[arg(long, default_value_t = 0.5)]
    pub c1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub c2: f64,
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GlueMode {
    Caps,
    Tangency,
    Central,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlueArgs {
    #[arg(long, value_enum)]
    pub mode: GlueMode,
    #[command(flatten)]
    pub input: BodyInput,
    /// Second body (tangency mode).
    #[arg(long)]
    pub body2: Option<PathBuf>,
    /// Tangency points "x,y" (tangency mode).
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Tangency latitudes and cap radii (caps mode).
    #[arg(long)]
    pub nu1: Option<f64>,
    #[arg(long)]
    pub nu2: Option<f64>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    /// G for caps mode.
    #[arg(long = "G")]
    pub g: Option<String>,
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    /// Bump scale; searched automatically when omitted.
    #[arg(long)]
    pub m: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Solve2dArgs {
    #[arg(long = "G")]
    pub g: String,
    /// Number of Newton seeds.
    #[arg(long, default_value_t = 16)]
    pub seeds: usize,
    #[arg(long, default_value_t = 60)]
    pub max_iter: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: BodyInput,
    #[arg(long = "G")]
    pub g: String,
    #[arg(long, value_enum, default_value_t = Diff::Spectral)]
    pub diff: Diff,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ProbeMrArgs {
    #[command(flatten)]
    pub input: BodyInput,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub direction: f64,
    /// Number of t samples on [-1, 1].
    #[arg(long, default_value_t = 21)]
    pub samples: usize,
    /// Also evaluate the two shadow-derivative integrals for this G.
    #[arg(long = "G")]
    pub g: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReportArgs {
    /// Comma-separated criterion ids; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u32>,
    /// Re-render from report manifests found under this directory instead of running.
    #[arg(long)]
    pub from: Option<PathBuf>,
}

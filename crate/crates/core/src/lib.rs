//! Numerical convex-body calculus for the non-homogeneous Firey problem
//! det(∇²h + h·I) = G(h) on the sphere.
//!
//! Bodies are carried as sampled support functions on a uniform circle grid.
//! Planar bodies are arbitrary; bodies in ℝⁿ for n ≥ 3 are bodies of
//! revolution about the x₂-axis and are represented by their planar profile.

pub mod acceptance;
pub mod construct;
pub mod error;
pub mod gclass;
pub mod geometry_core;
pub mod io;
pub mod measure_calculus;
pub mod random;
pub mod solve2d;
pub mod symmetrize;

pub use error::{FireyError, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

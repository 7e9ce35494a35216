use thiserror::Error;

/// Every failure the library reports. Variants carry enough context for the
/// CLI to emit a structured error object.
#[derive(Debug, Error)]
pub enum FireyError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-convex profile: {} node(s) below -{tol:.3e}, worst value {worst:.6e}, first offending nodes {nodes:?}", nodes.len())]
    NonConvex { nodes: Vec<usize>, worst: f64, tol: f64 },

    #[error("origin not interior: support value {value:.6e} at node {node}")]
    OriginNotInterior { node: usize, value: f64 },

    #[error("grid mismatch: {left} nodes vs {right} nodes")]
    GridMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("axis symmetry violated at node {node}: deviation {deviation:.3e}")]
    AxisSymmetry { node: usize, deviation: f64 },

    #[error("support values outside G domain [{lo}, {hi}]: {values:?}")]
    DomainViolation { values: Vec<f64>, lo: f64, hi: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no convergence in {what}: {detail}")]
    NonConvergence { what: String, detail: String, trace: Vec<f64> },

    #[error("tangent mismatch at ({:.6}, {:.6}): normal angles differ by {gap:.3e} rad", point[0], point[1])]
    TangentMismatch { point: [f64; 2], gap: f64 },

    #[error("point ({:.6}, {:.6}) is not on the boundary of body {body}: offset {offset:.3e}", point[0], point[1])]
    BoundaryNotFound { point: [f64; 2], body: usize, offset: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl FireyError {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            FireyError::InvalidInput(_) => "invalid_input",
            FireyError::NonConvex { .. } => "non_convex",
            FireyError::OriginNotInterior { .. } => "origin_not_interior",
            FireyError::GridMismatch { .. } => "grid_mismatch",
            FireyError::DimensionMismatch { .. } => "dimension_mismatch",
            FireyError::AxisSymmetry { .. } => "axis_symmetry",
            FireyError::DomainViolation { .. } => "domain_violation",
            FireyError::Precondition(_) => "precondition",
            FireyError::NonConvergence { .. } => "nonconvergence",
            FireyError::TangentMismatch { .. } => "tangent_mismatch",
            FireyError::BoundaryNotFound { .. } => "boundary_not_found",
            FireyError::Io(_) => "io",
            FireyError::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, FireyError>;

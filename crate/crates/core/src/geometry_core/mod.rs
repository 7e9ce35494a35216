//! Sphere grids, body representations, duality, barycentres and sandwich
//! diagnostics.

pub mod body;
pub mod centroid;
pub mod duality;
pub mod grid;
pub mod polygon;
pub mod spectral;

pub use body::{support_from_points, AxisymBody, Body, PointCloud, ProfileSupport};
pub use centroid::{barycentre, sandwich, steiner_point, SandwichReport};
pub use duality::{
    gauss_preimage, polar_support, radial_at_angle, radial_from_support, radial_node_min, radial_samples,
};
pub use grid::{ball_volume, sphere_area, CircleGrid, SphereQuadrature};
pub use polygon::{Polygon, Vec2};

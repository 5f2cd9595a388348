//! Parametric planar domains and their lattice discretization.

mod distance;
mod grid;
mod koch;
mod profile;
mod spec;

pub use distance::{
    distance_to_boundary, edge_gradient_bound, edge_gradient_jump, edge_gradient_jump_at, smooth_distance,
    DistanceField,
};
pub use grid::{rasterize, rasterize_with, GridDomain, Neighbor, RasterOptions, DEFAULT_MIN_CELLS};
pub use koch::koch_polygon;
pub use profile::{rotational_slice, ProfileCurve};
pub use spec::{DomainSpec, Shape};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("invalid domain parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error(
        "grid spacing {h} resolves the narrowest feature ({feature}) with {cells:.2} cells, \
         at least {required} required"
    )]
    ResolutionTooCoarse {
        h: f64,
        feature: f64,
        cells: f64,
        required: usize,
    },
    #[error("domain has no interior lattice node at h = {h}")]
    EmptyDomain { h: f64 },
    #[error("distance field is already smoothed")]
    AlreadySmoothed,
}

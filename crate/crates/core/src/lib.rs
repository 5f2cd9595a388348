//! Numerical potential theory on rasterized planar domains.
//!
//! The crate is organised bottom-up:
//!
//! - [`domain`]: parametric planar domains, rasterization onto uniform
//!   lattices, exact and mollified distance-to-boundary fields.
//! - [`elliptic`]: adapted second order operators
//!   `L u = -a:D²u + b·∇u + c u`, their upwinded M-matrix discretization and
//!   the generalized principal eigenvalue.
//! - [`green`]: Dirichlet solves, discrete Green's functions, the resolvent
//!   identity and harmonic minorants.
//! - [`metric`]: the quasi-hyperbolic metric as a weighted lattice graph,
//!   geodesics, four-point hyperbolicity, uniformity certificates, Harnack
//!   chains and Φ-chains.
//! - [`potential`]: reduits (obstacle problems) and the measurement suite for
//!   Harnack constants, relative maximum principles, Green multiplicativity,
//!   exponential decay, boundary Harnack ratios and Martin kernels.
//! - [`io`]: PGM heatmaps, CSV and Matrix Market writers.

pub mod domain;
pub mod elliptic;
pub mod geometry;
pub mod green;
pub mod io;
pub mod metric;
pub mod nodeset;
pub mod potential;
pub mod solver;
pub mod sparse;

pub use domain::{DistanceField, DomainSpec, GridDomain};
pub use elliptic::{DiscreteOperator, OperatorSpec, SpectralInfo};
pub use geometry::Point;
pub use green::{GreenColumn, GreenOracle};
pub use metric::{Geodesic, MetricGraph};
pub use nodeset::NodeSet;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

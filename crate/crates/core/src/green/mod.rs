//! Dirichlet solves, discrete Green's functions and the resolvent identity.

mod minorant;
mod oracle;
mod reference;
mod resolvent;

pub use minorant::{greatest_harmonic_minorant, solve_on_subdomain};
pub use oracle::{pole_excluded, solve_dirichlet, GreenColumn, GreenOracle, POLE_EXCLUSION};
pub use reference::{disk_green, euclidean_green, sphere_area};
pub use resolvent::{verify_resolvent, ResolventProbe, ResolventReport};

use thiserror::Error;

use crate::elliptic::EllipticError;
use crate::solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreenError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("node {0} is not an interior node")]
    NotInterior(usize),
    #[error("Green column with pole {pole} has non-positive value {value} at node {node}; the operator is not an M-matrix or t ≥ τ")]
    NonPositiveColumn { pole: usize, node: usize, value: f64 },
    #[error("x and y coincide")]
    CoincidentPoints,
    #[error("dimension must be >= 2, got {0}")]
    InvalidDimension(u32),
    #[error("shift t = {t} must satisfy 0 <= t < τ = {tau}")]
    ShiftExceedsTau { t: f64, tau: f64 },
    #[error("subdomain is not 4-connected")]
    DisconnectedSubdomain,
    #[error("subdomain is empty")]
    EmptySubdomain,
    #[error("{what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("probe pair ({0}, {0}) must consist of distinct nodes")]
    DegenerateProbe(usize),
}

//! Reduits and the measurement suite for the quantitative inequalities of
//! potential theory: Harnack constants, relative maximum principles, Green
//! multiplicativity, exponential decay, boundary Harnack ratios and Martin
//! kernels.

mod bhi;
mod decay;
mod harnack;
mod identities;
mod local;
mod martin;
mod multiplicativity;
mod reduit;
mod rmp;

pub use bhi::{bhi_experiment, boundary_harnack_ratio, BHIReport, BhiExperiment, BhiOptions};
pub use decay::{decay_fit, DecayFit, DecayMetric, DecaySample};
pub use harnack::{harnack_constant, HarnackReport};
pub use identities::{reduit_identities, ReduitIdentities};
pub use local::LocalProblem;
pub use martin::{martin_sequence, poisson_kernel_disk, MartinSequence};
pub use multiplicativity::{geodesic_triples, green_multiplicativity, MultiplicativityReport, TripleSample};
pub use reduit::{reduit, reduit_adjoint, reduit_with, ReduitOptions, ReduitResult};
pub use rmp::{relative_max_principle_rate, RmpReport};

use thiserror::Error;

use crate::green::GreenError;
use crate::metric::MetricError;
use crate::solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("obstacle iteration did not converge in {sweeps} sweeps (last update {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("input field is negative ({value}) at node {node}")]
    NegativeInput { node: usize, value: f64 },
    #[error("{what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("ball of radius {radius} around ({x}, {y}) needs clearance {required} from the boundary, has {available}")]
    BallNotContained {
        x: f64,
        y: f64,
        radius: f64,
        required: f64,
        available: f64,
    },
    #[error("no θ given and the operator carries no spectral information")]
    ThetaUnavailable,
    #[error("θ = {theta} must satisfy 0 <= θ < τ = {tau}")]
    InvalidTheta { theta: f64, tau: f64 },
    #[error("triple {index} violates the separation: min distance {distance} <= {required}")]
    TripleTooClose { index: usize, distance: f64, required: f64 },
    #[error("pair ({x}, {y}) lies inside the pole exclusion zone")]
    PairTooClose { x: usize, y: usize },
    #[error("distance spread too small: max {max} < 3 × min {min}")]
    InsufficientSpread { min: f64, max: f64 },
    #[error("{which} is not positive ({value}) at node {node}")]
    NonPositiveFunction {
        which: &'static str,
        node: usize,
        value: f64,
    },
    #[error("pole {pole} has boundary distance {distance} < 4h = {limit}")]
    PoleTooCloseToBoundary { pole: usize, distance: f64, limit: f64 },
    #[error("Poisson kernel needs |x| < 1 and |ζ| = 1, got |x| = {x_norm}, |ζ| = {zeta_norm}")]
    ArgumentOutOfDomain { x_norm: f64, zeta_norm: f64 },
    #[error("{name} is invalid: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("node set is empty")]
    EmptySet,
}

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<(), PotentialError> {
    if got == expected {
        Ok(())
    } else {
        Err(PotentialError::DimensionMismatch { what, got, expected })
    }
}

/// Ordinary least squares `y ≈ a + b x`; returns `(a, b, rms residual)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    (a, b, (rss / n).sqrt())
}

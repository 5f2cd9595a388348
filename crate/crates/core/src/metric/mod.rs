//! The quasi-hyperbolic metric as a weighted lattice graph.

mod chain;
mod delta;
mod graph;
mod phi;
mod uniform;

pub use chain::{harnack_chain, HarnackChain};
pub use delta::{
    four_point_delta, four_point_delta_exhaustive, four_point_delta_with, quadruple_delta, DeltaEstimate,
    EXHAUSTIVE_LIMIT,
};
pub use graph::{build_metric_graph, Geodesic, Graph, MetricGraph};
pub use phi::{build_phi_chain, PhiChain, PhiSample, DEFAULT_PITCH_FACTOR};
pub use uniform::{uniformity_constant, Binding, PairSample, UniformityReport};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("node {to} is unreachable from node {from}; the graph is disconnected")]
    Unreachable { from: usize, to: usize },
    #[error("edge ({0}, {1}) has a non-positive or non-finite weight {2}")]
    InvalidWeight(usize, usize, f64),
    #[error("node {0} is out of range")]
    NodeOutOfRange(usize),
    #[error("exhaustive four-point scan is limited to {limit} nodes, graph has {n}")]
    TooLargeForExhaustive { n: usize, limit: usize },
    #[error("graph has fewer than 4 nodes")]
    TooFewNodes,
    #[error("geodesic length {length} does not exceed pitch·count = {required}")]
    GeodesicTooShort { length: f64, required: f64 },
    #[error("Φ-chain sets are not strictly nested at index {index}; the grid is too coarse for this δ")]
    NestingViolated { index: usize },
    #[error("{name} must be finite and > 0, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("no lattice path from {from} to {to} keeps distance > {radius} from the boundary")]
    ChainBlocked { from: usize, to: usize, radius: f64 },
}

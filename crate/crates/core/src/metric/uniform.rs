use rayon::prelude::*;
use serde::Serialize;

use super::{MetricError, MetricGraph};

/// Which condition fixes the constant of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    Length,
    Cigar,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSample {
    pub p: usize,
    pub q: usize,
    /// Euclidean length of the quasi-hyperbolic geodesic.
    pub curve_length: f64,
    pub euclidean_distance: f64,
    pub length_ratio: f64,
    /// `max_t min(l(γ|[a,t]), l(γ|[t,b])) / đ(γ(t))`
    pub cigar_ratio: f64,
    pub c_pair: f64,
    pub binding: Binding,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    pub c_estimate: f64,
    pub pair_samples: Vec<PairSample>,
}

/// Certificate of uniformity for sampled pairs, using quasi-hyperbolic
/// geodesics as candidate curves.
pub fn uniformity_constant(graph: &MetricGraph, pairs: &[(usize, usize)]) -> Result<UniformityReport, MetricError> {
    let grid = graph.grid();
    let d = &graph.field().values;
    let samples: Vec<PairSample> = pairs
        .par_iter()
        .map(|&(p, q)| {
            let geo = graph.shortest_path(p, q)?;
            let pts: Vec<_> = geo.nodes.iter().map(|&n| grid.point(n)).collect();
            let mut before = vec![0.0; pts.len()];
            for k in 1..pts.len() {
                before[k] = before[k - 1] + pts[k].dist(pts[k - 1]);
            }
            let total = *before.last().expect("non-empty path");
            let cigar_ratio = geo
                .nodes
                .iter()
                .zip(&before)
                .map(|(&n, &b)| b.min(total - b) / d[n])
                .fold(0.0, f64::max);
            let euclid = grid.point(p).dist(grid.point(q));
            let length_ratio = if euclid > 0.0 { total / euclid } else { 1.0 };
            let (c_pair, binding) = if length_ratio >= cigar_ratio {
                (length_ratio, Binding::Length)
            } else {
                (cigar_ratio, Binding::Cigar)
            };
            Ok(PairSample {
                p,
                q,
                curve_length: total,
                euclidean_distance: euclid,
                length_ratio,
                cigar_ratio,
                c_pair,
                binding,
            })
        })
        .collect::<Result<_, MetricError>>()?;
    Ok(UniformityReport {
        c_estimate: samples.iter().map(|s| s.c_pair).fold(0.0, f64::max),
        pair_samples: samples,
    })
}

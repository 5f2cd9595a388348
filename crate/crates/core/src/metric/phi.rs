use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{Geodesic, MetricError, MetricGraph};
use crate::nodeset::NodeSet;

/// Default pitch in units of δ.
pub const DEFAULT_PITCH_FACTOR: f64 = 22.0;

/// One row of the measured Φ table: over boundary points `x ∈ ∂U_i` with
/// `d(x, x_i) ∈ [t_lo, t_hi)`, the smallest `d(x, ∂U_{i±1})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiSample {
    pub t_lo: f64,
    pub t_hi: f64,
    pub phi_min: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiChain {
    pub sets: Vec<NodeSet>,
    pub track_points: Vec<usize>,
    pub delta: f64,
    pub pitch: f64,
    pub phi0: f64,
    /// `d(x_i, x_{i+1})`
    pub spacing: Vec<f64>,
    pub measured_phi: Vec<PhiSample>,
}

fn outer_boundary(graph: &MetricGraph, set: &NodeSet) -> Vec<usize> {
    let g = graph.graph();
    (0..set.universe())
        .into_par_iter()
        .filter(|&x| !set.contains(x) && g.neighbors(x).any(|(y, _)| set.contains(y)))
        .collect()
}

fn touches_boundary(graph: &MetricGraph, set: &NodeSet, x: usize) -> bool {
    let inside = set.contains(x);
    graph.graph().neighbors(x).any(|(y, _)| set.contains(y) != inside)
}

/// Φ-chain along a geodesic with track points every `pitch_factor · δ`.
///
/// `U_i = {x : d(x, tail_i) < d(x, head_i)}` where `head_i`/`tail_i` are the
/// geodesic nodes at arclength `≤ a_i` / `> a_i`, `a_i = i · pitch`.
pub fn build_phi_chain(
    graph: &MetricGraph,
    geodesic: &Geodesic,
    delta: f64,
    count: usize,
    pitch_factor: f64,
) -> Result<PhiChain, MetricError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(MetricError::InvalidParameter {
            name: "delta",
            value: delta,
        });
    }
    if !(pitch_factor.is_finite() && pitch_factor > 0.0) {
        return Err(MetricError::InvalidParameter {
            name: "pitch_factor",
            value: pitch_factor,
        });
    }
    let pitch = pitch_factor * delta;
    let required = pitch * count as f64;
    if geodesic.length <= required || count == 0 {
        return Err(MetricError::GeodesicTooShort {
            length: geodesic.length,
            required,
        });
    }
    let s = geodesic.arclength(graph.graph());
    let n = graph.grid().interior_count();
    let built: Vec<(NodeSet, usize)> = (1..=count)
        .into_par_iter()
        .map(|i| {
            let a = pitch * i as f64;
            let (head, tail): (Vec<_>, Vec<_>) = geodesic.nodes.iter().zip(&s).partition(|(_, &sk)| sk <= a);
            let head: Vec<usize> = head.into_iter().map(|(&x, _)| x).collect();
            let tail: Vec<usize> = tail.into_iter().map(|(&x, _)| x).collect();
            let dh = graph.graph().multi_source_distances(&head);
            let dt = graph.graph().multi_source_distances(&tail);
            let set = NodeSet::from_predicate(n, |x| dt[x] < dh[x]);
            let track = s
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 - a).abs().total_cmp(&(y.1 - a).abs()).then(x.0.cmp(&y.0)))
                .map(|(k, _)| geodesic.nodes[k])
                .expect("geodesic is non-empty");
            (set, track)
        })
        .collect();
    let (sets, track_points): (Vec<_>, Vec<_>) = built.into_iter().unzip();
    let mut chain = PhiChain {
        sets,
        track_points,
        delta,
        pitch,
        phi0: pitch,
        spacing: Vec::new(),
        measured_phi: Vec::new(),
    };
    chain.validate(graph)?;
    chain.measure(graph);
    Ok(chain)
}

impl PhiChain {
    /// Check strict nesting and that each track point sits on the boundary
    /// of its set.
    pub fn validate(&self, graph: &MetricGraph) -> Result<(), MetricError> {
        for (i, set) in self.sets.iter().enumerate() {
            if set.is_empty() || !touches_boundary(graph, set, self.track_points[i]) {
                return Err(MetricError::NestingViolated { index: i });
            }
            if let Some(next) = self.sets.get(i + 1) {
                if !next.is_subset(set) || next.len() == set.len() {
                    return Err(MetricError::NestingViolated { index: i });
                }
            }
        }
        Ok(())
    }

    /// Whether `Φ₀ - w ≤ d(x_i, x_{i+1}) ≤ 3Φ₀` with slack `w` (one edge).
    pub fn spacing_ok(&self, slack: f64) -> bool {
        self.spacing
            .iter()
            .all(|&d| d >= self.phi0 - slack && d <= 3.0 * self.phi0 + slack)
    }

    fn measure(&mut self, graph: &MetricGraph) {
        self.spacing = self
            .track_points
            .windows(2)
            .map(|w| graph.distance(w[0], w[1]))
            .collect();
        let boundaries: Vec<Vec<usize>> = self.sets.iter().map(|u| outer_boundary(graph, u)).collect();
        let to_boundary: Vec<Vec<f64>> = boundaries
            .par_iter()
            .map(|b| graph.graph().multi_source_distances(b))
            .collect();
        let width = self.phi0 / 2.0;
        let mut table: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
        for (i, b) in boundaries.iter().enumerate() {
            let from_track = graph.distances_from(self.track_points[i]);
            let others: Vec<&Vec<f64>> = [i.checked_sub(1), Some(i + 1)]
                .into_iter()
                .flatten()
                .filter_map(|j| to_boundary.get(j))
                .collect();
            if others.is_empty() {
                continue;
            }
            for &x in b {
                let phi = others.iter().map(|d| d[x]).fold(f64::INFINITY, f64::min);
                let bucket = (from_track[x] / width).floor() as u64;
                let e = table.entry(bucket).or_insert((f64::INFINITY, 0));
                e.0 = e.0.min(phi);
                e.1 += 1;
            }
        }
        self.measured_phi = table
            .into_iter()
            .map(|(k, (phi_min, count))| PhiSample {
                t_lo: k as f64 * width,
                t_hi: (k + 1) as f64 * width,
                phi_min,
                count,
            })
            .collect();
    }

    /// The complements traversed backwards, with the same track points.
    pub fn reversed(&self, graph: &MetricGraph) -> Result<PhiChain, MetricError> {
        let mut chain = PhiChain {
            sets: self.sets.iter().rev().map(NodeSet::complement).collect(),
            track_points: self.track_points.iter().rev().copied().collect(),
            delta: self.delta,
            pitch: self.pitch,
            phi0: self.phi0,
            spacing: Vec::new(),
            measured_phi: Vec::new(),
        };
        chain.validate(graph)?;
        chain.measure(graph);
        Ok(chain)
    }

    /// Lower affine envelope `a + b·t` of the measured table: `b` is the
    /// least-squares slope of `phi_min` against bucket midpoints and `a`
    /// the largest intercept keeping every row above the line.
    pub fn affine_envelope(&self) -> Option<(f64, f64)> {
        let pts: Vec<(f64, f64)> = self
            .measured_phi
            .iter()
            .map(|r| ((r.t_lo + r.t_hi) / 2.0, r.phi_min))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let m = pts.len() as f64;
        let (mt, mp) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / m, a.1 + p.1 / m));
        let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mp)).sum();
        let b = sxy / sxx;
        let a = pts.iter().map(|p| p.1 - b * p.0).fold(f64::INFINITY, f64::min);
        Some((a, b))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domain::{distance_to_boundary, rasterize, DomainSpec};
    use crate::geometry::Point;
    use crate::metric::{build_metric_graph, four_point_delta};

    fn graph(spec: &DomainSpec, h: f64) -> MetricGraph {
        let g = Arc::new(rasterize(spec, h).unwrap());
        let f = Arc::new(distance_to_boundary(&g));
        build_metric_graph(&g, &f)
    }

    #[test]
    fn corridor_chain_grows_affinely() {
        let mg = graph(
            &DomainSpec::Strip {
                width: 1.0,
                length: 24.0,
            },
            1.0 / 16.0,
        );
        let g = mg.grid();
        let p = g.node_at(Point::new(-11.5, 0.0)).unwrap();
        let q = g.node_at(Point::new(11.5, 0.0)).unwrap();
        let geo = mg.shortest_path(p, q).unwrap();
        // pitch 2 in quasi-hyperbolic units (≈ 1 unit of length at đ = 1/2)
        let chain = build_phi_chain(&mg, &geo, 1.0, 8, 2.0).unwrap();
        assert_eq!(chain.sets.len(), 8);
        for w in chain.sets.windows(2) {
            assert!(w[1].is_subset(&w[0]) && w[1].len() < w[0].len());
        }
        let (_, b) = chain.affine_envelope().unwrap();
        assert!(b > 0.0, "slope {b}");
        let rev = chain.reversed(&mg).unwrap();
        let mut tp = rev.track_points.clone();
        tp.reverse();
        assert_eq!(tp, chain.track_points);
    }

    #[test]
    fn disk_chain_with_measured_delta() {
        let mg = graph(&DomainSpec::UnitDisk, 1.0 / 64.0);
        let g = mg.grid();
        let delta = four_point_delta(mg.graph(), 4000, 7).unwrap().delta;
        let p = g.node_at(Point::new(-0.98, 0.0)).unwrap();
        let q = g.node_at(Point::new(0.98, 0.0)).unwrap();
        let geo = mg.shortest_path(p, q).unwrap();
        // the disk is too small for 22δ: use the largest pitch fitting two sets
        let factor = geo.length / (3.0 * delta);
        let chain = build_phi_chain(&mg, &geo, delta, 2, factor).unwrap();
        let slack = geo
            .nodes
            .windows(2)
            .map(|w| mg.graph().edge_weight(w[0], w[1]).unwrap())
            .fold(0.0, f64::max);
        assert!(chain.spacing_ok(slack), "{:?} vs {}", chain.spacing, chain.phi0);
        assert!(matches!(
            build_phi_chain(&mg, &geo, delta, 2, DEFAULT_PITCH_FACTOR),
            Err(MetricError::GeodesicTooShort { .. })
        ));
    }
}

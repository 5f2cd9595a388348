use std::collections::BTreeSet;

use serde::Serialize;

use super::PotentialError;
use crate::green::GreenOracle;
use crate::metric::MetricGraph;

#[derive(Debug, Clone, Serialize)]
pub struct TripleSample {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub d_xy: f64,
    pub d_yz: f64,
    pub g_xz: f64,
    pub g_xy: f64,
    pub g_yz: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplicativityReport {
    pub delta: f64,
    pub separation_factor: f64,
    pub triples: Vec<TripleSample>,
    pub rho_min: f64,
    pub rho_max: f64,
    /// `max(ρ_max, 1/ρ_min)`.
    pub c_emp: f64,
}

/// Triples `(x, y, z)` with `y` at evenly spaced quasi-hyperbolic arclength
/// fractions `k/(count+1)` of the graph geodesic from `x` to `z`.
pub fn geodesic_triples(
    graph: &MetricGraph,
    x: usize,
    z: usize,
    count: usize,
) -> Result<Vec<(usize, usize, usize)>, PotentialError> {
    let path = graph.shortest_path(x, z)?;
    let s = path.arclength(graph.graph());
    let total = path.length;
    Ok((1..=count)
        .map(|k| {
            let target = total * k as f64 / (count + 1) as f64;
            let idx = s.partition_point(|&v| v < target).min(path.nodes.len() - 1);
            (x, path.nodes[idx], z)
        })
        .collect())
}

/// `ρ(x, y, z) = G(x, z) / (G(x, y) G(y, z))` over the given triples.
///
/// Every triple must satisfy `min(d(x, y), d(y, z)) > separation_factor · δ`
/// in the quasi-hyperbolic graph distance.
pub fn green_multiplicativity(
    oracle: &GreenOracle,
    graph: &MetricGraph,
    triples: &[(usize, usize, usize)],
    delta: f64,
    separation_factor: f64,
) -> Result<MultiplicativityReport, PotentialError> {
    if triples.is_empty() {
        return Err(PotentialError::EmptySet);
    }
    if !(delta >= 0.0 && separation_factor >= 0.0) {
        return Err(PotentialError::InvalidParameter {
            name: "delta",
            reason: format!("δ and the separation factor must be >= 0, got {delta} and {separation_factor}"),
        });
    }
    let required = separation_factor * delta;
    let mut dists = Vec::with_capacity(triples.len());
    for (index, &(x, y, z)) in triples.iter().enumerate() {
        let d_xy = graph.distance(x, y);
        let d_yz = graph.distance(y, z);
        let distance = d_xy.min(d_yz);
        if !(distance > required) {
            return Err(PotentialError::TripleTooClose {
                index,
                distance,
                required,
            });
        }
        dists.push((d_xy, d_yz));
    }

    let poles: Vec<usize> = triples
        .iter()
        .flat_map(|&(_, y, z)| [y, z])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let columns = oracle.columns(&poles, false)?;
    let col = |p: usize| &columns[poles.binary_search(&p).unwrap()];

    let samples: Vec<TripleSample> = triples
        .iter()
        .zip(dists)
        .map(|(&(x, y, z), (d_xy, d_yz))| {
            let g_xz = col(z)[x];
            let g_xy = col(y)[x];
            let g_yz = col(z)[y];
            TripleSample {
                x,
                y,
                z,
                d_xy,
                d_yz,
                g_xz,
                g_xy,
                g_yz,
                rho: g_xz / (g_xy * g_yz),
            }
        })
        .collect();
    let rho_min = samples.iter().map(|s| s.rho).fold(f64::INFINITY, f64::min);
    let rho_max = samples.iter().map(|s| s.rho).fold(0.0, f64::max);
    Ok(MultiplicativityReport {
        delta,
        separation_factor,
        c_emp: rho_max.max(1.0 / rho_min),
        triples: samples,
        rho_min,
        rho_max,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domain::{distance_to_boundary, rasterize, DomainSpec};
    use crate::elliptic::{discretize, OperatorSpec};
    use crate::geometry::Point;
    use crate::metric::build_metric_graph;

    #[test]
    fn symmetric_operator_gives_symmetric_ratio() {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, 1.0 / 32.0).unwrap());
        let field = Arc::new(distance_to_boundary(&g));
        let graph = build_metric_graph(&g, &field);
        let o = GreenOracle::new(discretize(&OperatorSpec::laplacian_plus(1.0), &g).unwrap());
        let x = g.node_at(Point::new(-0.75, 0.0)).unwrap();
        let z = g.node_at(Point::new(0.75, 0.0)).unwrap();
        let y = g.node_at(Point::ORIGIN).unwrap();
        let rep = green_multiplicativity(&o, &graph, &[(x, y, z), (z, y, x)], 0.1, 2.0).unwrap();
        let (a, b) = (rep.triples[0].rho, rep.triples[1].rho);
        assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
        assert!(rep.c_emp >= 1.0 && rep.c_emp.is_finite());
    }

    #[test]
    fn separation_is_enforced() {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, 1.0 / 16.0).unwrap());
        let field = Arc::new(distance_to_boundary(&g));
        let graph = build_metric_graph(&g, &field);
        let o = GreenOracle::new(discretize(&OperatorSpec::laplacian(), &g).unwrap());
        let x = g.node_at(Point::new(-0.5, 0.0)).unwrap();
        let z = g.node_at(Point::new(0.5, 0.0)).unwrap();
        let triples = geodesic_triples(&graph, x, z, 3).unwrap();
        assert_eq!(triples.len(), 3);
        assert!(matches!(
            green_multiplicativity(&o, &graph, &triples, 1.0, 22.0),
            Err(PotentialError::TripleTooClose { index: 0, .. })
        ));
    }
}

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::Serialize;

use super::MetricError;
use crate::domain::{DistanceField, GridDomain, Neighbor};

/// Undirected graph with positive edge weights in adjacency-array form.
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Entry {
    dist: f64,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// A shortest path in a weighted graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Geodesic {
    pub nodes: Vec<usize>,
    pub length: f64,
}

impl Geodesic {
    pub fn start(&self) -> usize {
        self.nodes[0]
    }

    pub fn end(&self) -> usize {
        *self.nodes.last().expect("geodesics are non-empty")
    }

    /// Cumulative length at each path node.
    pub fn arclength(&self, graph: &Graph) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut s = 0.0;
        out.push(0.0);
        for w in self.nodes.windows(2) {
            s += graph
                .edge_weight(w[0], w[1])
                .expect("consecutive path nodes are adjacent");
            out.push(s);
        }
        out
    }

    pub fn reversed(&self) -> Geodesic {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Geodesic {
            nodes,
            length: self.length,
        }
    }
}

impl Graph {
    /// Build from undirected edges; parallel edges keep the smaller weight.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Graph, MetricError> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(MetricError::NodeOutOfRange(a.max(b)));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(MetricError::InvalidWeight(a, b, w));
            }
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for mut list in adj {
            list.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
            list.dedup_by_key(|e| e.0);
            for (t, w) in list {
                targets.push(t);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Ok(Graph {
            offsets,
            targets,
            weights,
        })
    }

    /// Path `0 - 1 - … - (n-1)` with the given edge weights.
    pub fn path(weights: &[f64]) -> Result<Graph, MetricError> {
        let edges: Vec<_> = weights.iter().enumerate().map(|(i, &w)| (i, i + 1, w)).collect();
        Graph::from_edges(weights.len() + 1, &edges)
    }

    /// Cycle on `n` nodes with unit weights.
    pub fn cycle(n: usize) -> Result<Graph, MetricError> {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Graph::from_edges(n, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.offsets[u]..self.offsets[u + 1];
        self.targets[span.clone()]
            .iter()
            .copied()
            .zip(self.weights[span].iter().copied())
    }

    pub fn edge_weight(&self, a: usize, b: usize) -> Option<f64> {
        self.neighbors(a).find(|&(t, _)| t == b).map(|(_, w)| w)
    }

    fn check(&self, u: usize) -> Result<(), MetricError> {
        if u < self.node_count() {
            Ok(())
        } else {
            Err(MetricError::NodeOutOfRange(u))
        }
    }

    /// Dijkstra from a set of sources. Ties are broken by node index, so the
    /// predecessor tree is deterministic. Stops early once `target` settles.
    pub fn dijkstra(&self, sources: &[usize], target: Option<usize>) -> (Vec<f64>, Vec<usize>) {
        let n = self.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Entry { dist: 0.0, node: s });
        }
        while let Some(Entry { dist: d, node: u }) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if Some(u) == target {
                break;
            }
            for (v, w) in self.neighbors(u) {
                if done[v] {
                    continue;
                }
                let nd = d + w;
                if nd < dist[v] || (nd == dist[v] && u < pred[v]) {
                    if nd < dist[v] {
                        heap.push(Entry { dist: nd, node: v });
                    }
                    dist[v] = nd;
                    pred[v] = u;
                }
            }
        }
        (dist, pred)
    }

    pub fn distances(&self, source: usize) -> Vec<f64> {
        self.dijkstra(&[source], None).0
    }

    pub fn multi_source_distances(&self, sources: &[usize]) -> Vec<f64> {
        self.dijkstra(sources, None).0
    }

    pub fn shortest_path(&self, p: usize, q: usize) -> Result<Geodesic, MetricError> {
        self.check(p)?;
        self.check(q)?;
        if p == q {
            return Ok(Geodesic {
                nodes: vec![p],
                length: 0.0,
            });
        }
        let (dist, pred) = self.dijkstra(&[p], Some(q));
        if !dist[q].is_finite() {
            return Err(MetricError::Unreachable { from: p, to: q });
        }
        let mut nodes = vec![q];
        let mut u = q;
        while u != p {
            u = pred[u];
            nodes.push(u);
        }
        nodes.reverse();
        let length = nodes
            .windows(2)
            .map(|w| self.edge_weight(w[0], w[1]).expect("path edges exist"))
            .sum();
        Ok(Geodesic { nodes, length })
    }

    /// All-pairs distances (one Dijkstra per node, in parallel).
    pub fn all_pairs(&self) -> Vec<Vec<f64>> {
        (0..self.node_count())
            .into_par_iter()
            .map(|s| self.distances(s))
            .collect()
    }
}

/// Quasi-hyperbolic metric graph on the interior nodes of a grid.
///
/// Edges join 8-neighbours with weight `|p - q|·(1/đ(p) + 1/đ(q))/2`, the
/// trapezoid rule for `∫ 1/đ` along the segment.
#[derive(Debug)]
pub struct MetricGraph {
    grid: Arc<GridDomain>,
    field: Arc<DistanceField>,
    graph: Graph,
    cache: RwLock<HashMap<usize, Arc<Vec<f64>>>>,
}

pub fn build_metric_graph(grid: &Arc<GridDomain>, field: &Arc<DistanceField>) -> MetricGraph {
    let h = grid.h();
    let d = &field.values;
    let mut edges = Vec::with_capacity(4 * grid.interior_count());
    for u in 0..grid.interior_count() {
        // each undirected edge once: right, up, up-right, up-left
        for (di, dj) in [(1, 0), (0, 1), (1, 1), (-1, 1)] {
            if let Neighbor::Interior(v) = grid.neighbor(u, di, dj) {
                let len = h * ((di * di + dj * dj) as f64).sqrt();
                edges.push((u, v, len * (1.0 / d[u] + 1.0 / d[v]) / 2.0));
            }
        }
    }
    let graph =
        Graph::from_edges(grid.interior_count(), &edges).expect("distance fields are positive on interior nodes");
    MetricGraph {
        grid: grid.clone(),
        field: field.clone(),
        graph,
        cache: RwLock::new(HashMap::new()),
    }
}

impl MetricGraph {
    pub fn grid(&self) -> &Arc<GridDomain> {
        &self.grid
    }

    pub fn field(&self) -> &DistanceField {
        &self.field
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn smoothed(&self) -> bool {
        self.field.smoothed
    }

    /// Single-source distances, cached per source.
    pub fn distances_from(&self, source: usize) -> Arc<Vec<f64>> {
        if let Some(d) = self.cache.read().expect("cache lock poisoned").get(&source) {
            return d.clone();
        }
        let d = Arc::new(self.graph.distances(source));
        self.cache
            .write()
            .expect("cache lock poisoned")
            .entry(source)
            .or_insert(d)
            .clone()
    }

    pub fn distance(&self, p: usize, q: usize) -> f64 {
        self.distances_from(p)[q]
    }

    pub fn shortest_path(&self, p: usize, q: usize) -> Result<Geodesic, MetricError> {
        self.graph.shortest_path(p, q)
    }

    /// Euclidean length of a node path.
    pub fn euclidean_length(&self, path: &[usize]) -> f64 {
        path.windows(2)
            .map(|w| self.grid.point(w[0]).dist(self.grid.point(w[1])))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{distance_to_boundary, rasterize, DomainSpec};
    use crate::geometry::Point;

    fn disk_graph(h: f64) -> MetricGraph {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, h).unwrap());
        let f = Arc::new(distance_to_boundary(&g));
        build_metric_graph(&g, &f)
    }

    #[test]
    fn trapezoid_weights() {
        let g = Graph::from_edges(3, &[(0, 1, 0.5 * (1.0 + 1.0)), (1, 2, 0.5 * (1.0 + 3.0))]).unwrap();
        assert_eq!(g.edge_weight(0, 1), Some(1.0));
        assert_eq!(g.edge_weight(2, 1), Some(2.0));
        assert!(Graph::from_edges(2, &[(0, 1, 0.0)]).is_err());
        let mg = disk_graph(1.0 / 16.0);
        let c = mg.grid().node_at(Point::ORIGIN).unwrap();
        let r = mg.grid().node_at(Point::new(1.0 / 16.0, 0.0)).unwrap();
        let expected = (1.0 / 16.0) * (1.0 + 1.0 / (1.0 - 1.0 / 16.0)) / 2.0;
        assert!((mg.graph().edge_weight(c, r).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn radial_distance_matches_quadrature() {
        // ∫_0^r dt/(1-t) = ln(1/(1-r)) along the radius
        let mg = disk_graph(1.0 / 128.0);
        let g = mg.grid();
        let c = g.node_at(Point::ORIGIN).unwrap();
        let q = g.node_at(Point::new(0.9, 0.0)).unwrap();
        let exact = (1.0f64 / 0.1).ln();
        let d = mg.distance(c, q);
        assert!((d - exact).abs() < 0.05 * exact, "{d} vs {exact}");
    }

    #[test]
    fn paths_are_deterministic_and_consistent() {
        let mg = disk_graph(1.0 / 32.0);
        let g = mg.grid();
        let p = g.node_at(Point::new(-0.875, 0.0)).unwrap();
        let q = g.node_at(Point::new(0.875, 0.0)).unwrap();
        let geo = mg.shortest_path(p, q).unwrap();
        assert_eq!(geo, mg.shortest_path(p, q).unwrap());
        assert!((geo.length - mg.distance(p, q)).abs() < 1e-12);
        let s = geo.arclength(mg.graph());
        assert!((s.last().unwrap() - geo.length).abs() < 1e-12);
        let mut seen = std::collections::HashSet::new();
        assert!(geo.nodes.iter().all(|n| seen.insert(*n)));
        assert_eq!(mg.shortest_path(p, p).unwrap().length, 0.0);
        // the path restricted to the chord nodes is no shorter
        let chord: Vec<usize> = (0..g.interior_count())
            .filter(|&n| g.point(n).y == 0.0 && g.point(n).x.abs() <= 0.875)
            .collect();
        let chord_len: f64 = chord
            .windows(2)
            .map(|w| mg.graph().edge_weight(w[0], w[1]).unwrap())
            .sum();
        assert!(geo.length <= chord_len + 1e-12);

        // off-centre chords bow towards the centre and are strictly shorter
        let p = g.node_at(Point::new(-0.625, 0.5)).unwrap();
        let q = g.node_at(Point::new(0.625, 0.5)).unwrap();
        let geo = mg.shortest_path(p, q).unwrap();
        let chord: Vec<usize> = (0..g.interior_count())
            .filter(|&n| g.point(n).y == 0.5 && g.point(n).x.abs() <= 0.625 + 1e-12)
            .collect();
        let chord_len: f64 = chord
            .windows(2)
            .map(|w| mg.graph().edge_weight(w[0], w[1]).unwrap())
            .sum();
        assert!(geo.length < chord_len);
        assert!(geo.nodes.iter().any(|&n| g.point(n).y < 0.5));
    }

    #[test]
    fn disconnected_graphs_report_unreachable() {
        let g = Graph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(g.shortest_path(0, 3), Err(MetricError::Unreachable { from: 0, to: 3 }));
        assert!(matches!(g.shortest_path(0, 9), Err(MetricError::NodeOutOfRange(9))));
    }
}

use serde::Serialize;

use super::{Graph, MetricError};
use crate::domain::{DistanceField, GridDomain, Neighbor};
use crate::geometry::Point;

#[derive(Debug, Clone, Serialize)]
pub struct HarnackChain {
    pub radius: f64,
    /// Ball centers, equally spaced in arclength along the lattice path.
    pub centers: Vec<Point>,
    /// Nearest interior node of each center.
    pub nodes: Vec<usize>,
    pub path_length: f64,
}

/// Harnack chain from `p` to `q` with balls of radius `r`.
///
/// The chain follows the Euclidean-shortest 8-neighbour lattice path through
/// nodes with `đ > r + h`, which keeps every point of the path (and therefore
/// every center) at distance more than `r` from the boundary. Consecutive
/// centers are `L/m ≤ r/2` apart with `m = ⌈2L/r⌉`.
pub fn harnack_chain(
    grid: &GridDomain,
    field: &DistanceField,
    p: usize,
    q: usize,
    r: f64,
) -> Result<HarnackChain, MetricError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(MetricError::InvalidParameter { name: "r", value: r });
    }
    let n = grid.interior_count();
    for node in [p, q] {
        if node >= n {
            return Err(MetricError::NodeOutOfRange(node));
        }
    }
    if p == q {
        return Ok(HarnackChain {
            radius: r,
            centers: vec![grid.point(p)],
            nodes: vec![p],
            path_length: 0.0,
        });
    }
    let h = grid.h();
    let blocked = MetricError::ChainBlocked {
        from: p,
        to: q,
        radius: r,
    };
    let ok = |u: usize| field.values[u] > r + h;
    if !ok(p) || !ok(q) {
        return Err(blocked);
    }
    let mut edges = Vec::new();
    for u in (0..n).filter(|&u| ok(u)) {
        for (di, dj) in [(1, 0), (0, 1), (1, 1), (-1, 1)] {
            if let Neighbor::Interior(v) = grid.neighbor(u, di, dj) {
                if ok(v) {
                    edges.push((u, v, h * ((di * di + dj * dj) as f64).sqrt()));
                }
            }
        }
    }
    let graph = Graph::from_edges(n, &edges).expect("lattice edge lengths are positive");
    let path = graph.shortest_path(p, q).map_err(|_| blocked)?;
    let pts: Vec<Point> = path.nodes.iter().map(|&u| grid.point(u)).collect();
    let total = path.length;
    let m = ((2.0 * total / r) - 1e-9).ceil().max(1.0) as usize;
    let step = total / m as f64;
    let mut centers = Vec::with_capacity(m + 1);
    let mut seg = 0;
    let mut seg_start = 0.0;
    for k in 0..=m {
        let s = if k == m { total } else { k as f64 * step };
        while seg + 1 < pts.len() - 1 && seg_start + pts[seg].dist(pts[seg + 1]) < s {
            seg_start += pts[seg].dist(pts[seg + 1]);
            seg += 1;
        }
        let len = pts[seg].dist(pts[seg + 1]);
        let t = ((s - seg_start) / len).clamp(0.0, 1.0);
        centers.push(pts[seg] + (pts[seg + 1] - pts[seg]) * t);
    }
    let nodes = centers.iter().map(|&c| grid.nearest_node(c)).collect();
    Ok(HarnackChain {
        radius: r,
        centers,
        nodes,
        path_length: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{distance_to_boundary, rasterize, DomainSpec};

    #[test]
    fn corridor_spacing() {
        let g = rasterize(
            &DomainSpec::Strip {
                width: 3.0,
                length: 6.0,
            },
            1.0 / 16.0,
        )
        .unwrap();
        let f = distance_to_boundary(&g);
        let p = g.node_at(Point::new(-0.5, 0.0)).unwrap();
        let q = g.node_at(Point::new(0.5, 0.0)).unwrap();
        let c = harnack_chain(&g, &f, p, q, 0.5).unwrap();
        assert_eq!(c.centers.len(), 5);
        for w in c.centers.windows(2) {
            assert!((w[0].dist(w[1]) - 0.25).abs() < 1e-12);
        }
        assert_eq!(c.nodes[0], p);
        assert_eq!(*c.nodes.last().unwrap(), q);
        let single = harnack_chain(&g, &f, p, p, 0.5).unwrap();
        assert_eq!(single.nodes, vec![p]);
    }

    #[test]
    fn routes_around_the_hole() {
        let spec = DomainSpec::SquareMinusBall {
            side: 2.0,
            hole_radius: 0.5,
        };
        let g = rasterize(&spec, 1.0 / 32.0).unwrap();
        let f = distance_to_boundary(&g);
        let p = g.node_at(Point::new(-0.75, 0.5)).unwrap();
        let q = g.node_at(Point::new(0.75, 0.5)).unwrap();
        let r = 0.1;
        let c = harnack_chain(&g, &f, p, q, r).unwrap();
        let shape = g.shape();
        for (k, x) in c.centers.iter().enumerate() {
            assert!(shape.contains(*x) && shape.boundary_distance(*x) > r);
            if k > 0 {
                assert!(c.centers[k - 1].dist(*x) <= r / 2.0 + 1e-12);
            }
        }
        assert!(c.centers.len() <= (2.0 * c.path_length / r).ceil() as usize + 1);
        assert!(c.path_length > p_q_chord(&g, p, q));
        // balls of radius 0.3 do not fit at the endpoints
        assert!(matches!(
            harnack_chain(&g, &f, p, q, 0.3),
            Err(MetricError::ChainBlocked { .. })
        ));
    }

    fn p_q_chord(g: &GridDomain, p: usize, q: usize) -> f64 {
        g.point(p).dist(g.point(q))
    }
}

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{Graph, MetricError};

/// Graphs up to this size may be scanned exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 40;

const DEFAULT_POOL: usize = 64;

/// Four-point hyperbolicity estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    pub sample_count: usize,
    pub witness: [usize; 4],
    pub exhaustive: bool,
}

/// `δ(x,y,z,w)`: half the gap between the two largest of the three pair
/// sums, which is the symmetric form of the four-point condition.
pub fn quadruple_delta(d: impl Fn(usize, usize) -> f64, q: [usize; 4]) -> f64 {
    let [x, y, z, w] = q;
    let mut s = [d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)];
    s.sort_by(f64::total_cmp);
    ((s[2] - s[1]) / 2.0).max(0.0)
}

fn better(a: (f64, [usize; 4]), b: (f64, [usize; 4])) -> (f64, [usize; 4]) {
    // larger δ wins; ties resolved towards the lexicographically smaller witness
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

/// Exact δ over all quadruples; limited to [`EXHAUSTIVE_LIMIT`] nodes.
pub fn four_point_delta_exhaustive(graph: &Graph) -> Result<DeltaEstimate, MetricError> {
    let n = graph.node_count();
    if n > EXHAUSTIVE_LIMIT {
        return Err(MetricError::TooLargeForExhaustive {
            n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    if n < 4 {
        return Err(MetricError::TooFewNodes);
    }
    let d = graph.all_pairs();
    let dist = |a: usize, b: usize| d[a][b];
    let mut best = (0.0, [0, 1, 2, 3]);
    let mut count = 0;
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                for w in z + 1..n {
                    count += 1;
                    let q = [x, y, z, w];
                    best = better(best, (quadruple_delta(dist, q), q));
                }
            }
        }
    }
    Ok(DeltaEstimate {
        delta: best.0,
        sample_count: count,
        witness: best.1,
        exhaustive: true,
    })
}

pub fn four_point_delta(graph: &Graph, samples: usize, seed: u64) -> Result<DeltaEstimate, MetricError> {
    four_point_delta_with(graph, samples, seed, DEFAULT_POOL)
}

/// Sampled four-point δ.
///
/// A pool of `pool_size` nodes (all nodes for small graphs) is drawn from the
/// seed, exact distances between pool nodes are computed, and quadruples are
/// drawn from one sequential stream. The pool does not depend on `samples`,
/// so a larger sample count evaluates a superset of quadruples and never
/// lowers the estimate.
pub fn four_point_delta_with(
    graph: &Graph,
    samples: usize,
    seed: u64,
    pool_size: usize,
) -> Result<DeltaEstimate, MetricError> {
    let n = graph.node_count();
    if n < 4 {
        return Err(MetricError::TooFewNodes);
    }
    if samples == 0 {
        return Err(MetricError::InvalidParameter {
            name: "sample_quadruples",
            value: 0.0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<usize> = if n <= pool_size.max(4) {
        (0..n).collect()
    } else {
        let mut p = sample(&mut rng, n, pool_size.max(4)).into_vec();
        p.sort_unstable();
        p
    };
    let rows: Vec<Vec<f64>> = pool.par_iter().map(|&s| graph.distances(s)).collect();
    let m = pool.len();
    if let Some((i, j)) = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .find(|&(i, j)| !rows[i][pool[j]].is_finite())
    {
        return Err(MetricError::Unreachable {
            from: pool[i],
            to: pool[j],
        });
    }
    let dist = |a: usize, b: usize| rows[a][pool[b]];
    let mut best = (f64::NEG_INFINITY, [0usize; 4]);
    for _ in 0..samples {
        let mut q = [0usize; 4];
        // four distinct pool indices
        let mut k = 0;
        while k < 4 {
            let c = rng.random_range(0..m);
            if !q[..k].contains(&c) {
                q[k] = c;
                k += 1;
            }
        }
        let delta = quadruple_delta(dist, q);
        let mut nodes = q.map(|i| pool[i]);
        nodes.sort_unstable();
        best = better(best, (delta, nodes));
    }
    Ok(DeltaEstimate {
        delta: best.0,
        sample_count: samples,
        witness: best.1,
        exhaustive: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn star(legs: usize) -> Graph {
        let edges: Vec<_> = (1..=legs).map(|i| (0, i, 1.0)).collect();
        Graph::from_edges(legs + 1, &edges).unwrap()
    }

    fn witness_delta(g: &Graph, e: &DeltaEstimate) -> f64 {
        let d = g.all_pairs();
        quadruple_delta(|a, b| d[a][b], e.witness)
    }

    #[test]
    fn trees_are_zero_hyperbolic() {
        // dyadic weights keep every path sum exact
        let path = Graph::path(&[0.25, 2.0, 1.5, 0.75, 5.0]).unwrap();
        assert_eq!(four_point_delta_exhaustive(&path).unwrap().delta, 0.0);
        assert_eq!(four_point_delta(&path, 500, 1).unwrap().delta, 0.0);
        assert_eq!(four_point_delta_exhaustive(&star(3)).unwrap().delta, 0.0);
    }

    #[test]
    fn four_cycle_has_delta_one() {
        let c4 = Graph::cycle(4).unwrap();
        let e = four_point_delta_exhaustive(&c4).unwrap();
        assert_eq!(e.delta, 1.0);
        assert_eq!(e.witness, [0, 1, 2, 3]);
        assert_eq!(witness_delta(&c4, &e), e.delta);
    }

    #[test]
    fn limits() {
        assert!(matches!(
            four_point_delta_exhaustive(&Graph::cycle(41).unwrap()),
            Err(MetricError::TooLargeForExhaustive { .. })
        ));
        assert_eq!(
            four_point_delta(&Graph::cycle(3).unwrap(), 10, 0),
            Err(MetricError::TooFewNodes)
        );
    }

    fn random_graph(n: usize, extra: &[(usize, usize, f64)]) -> Graph {
        // spanning path plus chords keeps the graph connected
        let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0 + (i % 3) as f64)).collect();
        edges.extend(extra.iter().map(|&(a, b, w)| (a % n, b % n, w)).filter(|e| e.0 != e.1));
        Graph::from_edges(n, &edges).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn sampled_matches_exhaustive_on_small_graphs(
            n in 4usize..14,
            extra in prop::collection::vec((0usize..40, 0usize..40, 0.5f64..4.0), 0..12),
            seed in 0u64..1000,
        ) {
            let g = random_graph(n, &extra);
            let ex = four_point_delta_exhaustive(&g).unwrap();
            let sa = four_point_delta(&g, 20_000, seed).unwrap();
            prop_assert!((ex.delta - sa.delta).abs() < 1e-12);
            prop_assert!((witness_delta(&g, &sa) - sa.delta).abs() < 1e-12);
        }

        #[test]
        fn more_samples_never_lower_delta(
            n in 30usize..90,
            extra in prop::collection::vec((0usize..90, 0usize..90, 0.5f64..4.0), 0..40),
            seed in 0u64..1000,
            few in 1usize..200,
        ) {
            let g = random_graph(n, &extra);
            let a = four_point_delta_with(&g, few, seed, 16).unwrap();
            let b = four_point_delta_with(&g, few * 3, seed, 16).unwrap();
            prop_assert!(b.delta >= a.delta);
        }
    }
}

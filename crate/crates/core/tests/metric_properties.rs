use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use qhlab_core::domain::{distance_to_boundary, rasterize};
use qhlab_core::metric::build_metric_graph;
use qhlab_core::{DomainSpec, MetricGraph};

fn graph() -> &'static MetricGraph {
    static GRAPH: OnceLock<MetricGraph> = OnceLock::new();
    GRAPH.get_or_init(|| {
        let spec = DomainSpec::SquareMinusBall {
            side: 2.0,
            hole_radius: 0.5,
        };
        let g = Arc::new(rasterize(&spec, 1.0 / 16.0).unwrap());
        let field = Arc::new(distance_to_boundary(&g));
        build_metric_graph(&g, &field)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_distance_is_a_metric(a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>(), c in any::<prop::sample::Index>()) {
        let g = graph();
        let n = g.grid().interior_count();
        let (x, y, z) = (a.index(n), b.index(n), c.index(n));
        let (dxy, dyz, dxz) = (g.distance(x, y), g.distance(y, z), g.distance(x, z));
        prop_assert!(dxz <= dxy + dyz + 1e-12 * (dxy + dyz));
        // summation order differs between the two directions
        prop_assert!((dxy - g.distance(y, x)).abs() <= 1e-12 * dxy);
        prop_assert_eq!(g.distance(x, x), 0.0);
        if x != y {
            prop_assert!(dxy > 0.0);
        }
    }
}

use std::f64::consts::TAU;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use qhlab_core::domain::rasterize;
use qhlab_core::elliptic::discretize;
use qhlab_core::potential::{reduit, reduit_identities, ReduitOptions};
use qhlab_core::{DomainSpec, GreenOracle, NodeSet, OperatorSpec, Point};

fn oracle() -> &'static GreenOracle {
    static ORACLE: OnceLock<GreenOracle> = OnceLock::new();
    ORACLE.get_or_init(|| {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, 1.0 / 16.0).unwrap());
        GreenOracle::new(discretize(&OperatorSpec::laplacian(), &g).unwrap())
    })
}

fn polar(r: f64, t: f64) -> Point {
    Point::new(r * t.cos(), r * t.sin())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reduit_identities_hold(
        ca in (0.0f64..0.6, 0.0f64..TAU),
        cb in (0.0f64..0.6, 0.0f64..TAU),
        ra in 0.1f64..0.35,
        rb in 0.1f64..0.35,
        poles in ((0.0f64..0.8, 0.0f64..TAU), (0.0f64..0.8, 0.0f64..TAU)),
        x in (0.0f64..0.8, 0.0f64..TAU),
        lambda in 0.01f64..100.0,
    ) {
        let o = oracle();
        let g = o.grid();
        let a = NodeSet::ball(g, polar(ca.0, ca.1), ra);
        let b = NodeSet::ball(g, polar(cb.0, cb.1), rb);
        let y = g.nearest_node(polar((poles.0).0, (poles.0).1));
        let z = g.nearest_node(polar((poles.1).0, (poles.1).1));
        let x = g.nearest_node(polar(x.0, x.1));
        prop_assume!(!a.is_empty() && !b.is_empty());
        let opts = ReduitOptions { tol: 1e-12, ..Default::default() };
        let r = reduit_identities(o, &a, &b, (y, z), x, lambda, &opts).unwrap();
        prop_assert!(r.worst() < 1e-8, "{:?}", r);
    }

    #[test]
    fn reduit_is_monotone_in_the_set(
        c in (0.0f64..0.5, 0.0f64..TAU),
        r in 0.1f64..0.3,
        grow in 0.0f64..0.2,
    ) {
        let o = oracle();
        let g = o.grid();
        let small = NodeSet::ball(g, polar(c.0, c.1), r);
        let large = NodeSet::ball(g, polar(c.0, c.1), r + grow);
        let one = vec![1.0; g.interior_count()];
        let rs = reduit(o.op(), &one, &small).unwrap();
        let rl = reduit(o.op(), &one, &large).unwrap();
        for (s, l) in rs.values.iter().zip(&rl.values) {
            prop_assert!(*s <= l + 1e-7);
            prop_assert!(*l <= 1.0 + 1e-12);
        }
    }
}

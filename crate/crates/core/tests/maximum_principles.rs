use std::sync::Arc;

use proptest::prelude::*;
use qhlab_core::domain::rasterize;
use qhlab_core::elliptic::discretize;
use qhlab_core::green::solve_dirichlet;
use qhlab_core::potential::LocalProblem;
use qhlab_core::solver::SolverKind;
use qhlab_core::{DomainSpec, GreenOracle, NodeSet, OperatorSpec, Point};

fn operator(b1: f64, b2: f64, c: f64) -> OperatorSpec {
    OperatorSpec::laplacian_plus(c).with_drift(b1, b2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nonnegative_boundary_data_give_nonnegative_solutions(
        b1 in -0.9f64..0.9,
        b2 in -0.9f64..0.9,
        c in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let g = Arc::new(rasterize(&DomainSpec::Annulus { r_in: 0.3, r_out: 1.0 }, 1.0 / 16.0).unwrap());
        let op = discretize(&operator(b1, b2, c), &g).unwrap();
        prop_assert!(op.has_m_matrix_pattern());
        let mut state = seed;
        let ghost: Vec<f64> = (0..g.ghost_count())
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                // roughly a third of the ghost nodes carry zero data
                ((state >> 33) as f64 / (1u64 << 31) as f64 - 0.33).max(0.0)
            })
            .collect();
        let u = solve_dirichlet(&op, &ghost, &vec![0.0; op.n()], SolverKind::Direct, 1e-12).unwrap();
        let top = ghost.iter().copied().fold(0.0, f64::max);
        for &v in &u {
            prop_assert!(v >= -1e-12 * top);
            prop_assert!(v <= top * (1.0 + 1e-12));
        }
    }

    #[test]
    fn superharmonic_functions_dominate_harmonic_ones(
        cx in -0.4f64..0.4,
        cy in -0.4f64..0.4,
        r in 0.15f64..0.4,
        pole_angle in 0.0f64..std::f64::consts::TAU,
        data_scale in 0.1f64..1.0,
    ) {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, 1.0 / 32.0).unwrap());
        let op = discretize(&OperatorSpec::laplacian_plus(0.5), &g).unwrap();
        let ball = NodeSet::ball(&g, Point::new(cx, cy), r);
        prop_assume!(!ball.is_empty());
        // u is a Green potential with its pole away from the ball, p takes
        // boundary values below u on the outer layer of the ball
        let pole = g.nearest_node(Point::new(0.85 * pole_angle.cos(), 0.85 * pole_angle.sin()));
        prop_assume!(!ball.contains(pole));
        let oracle = GreenOracle::new(op.clone());
        let u = oracle.column(pole).unwrap().values.clone();
        let local = LocalProblem::new(&op, &ball, SolverKind::Direct, 1e-12).unwrap();
        let data: Vec<f64> = local.outer().iter().enumerate()
            .map(|(k, &j)| u[j] * data_scale * (0.5 + 0.5 * ((k as f64) * 0.7).sin().abs()))
            .collect();
        let p = local.solve(&data).unwrap();
        for (&i, &pv) in local.members().iter().zip(&p) {
            prop_assert!(u[i] >= pv - 1e-10 * u[i], "node {i}: u = {} < p = {pv}", u[i]);
        }
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_len, LocalProblem, PotentialError};
use crate::geometry::Point;
use crate::green::GreenOracle;
use crate::nodeset::NodeSet;
use crate::solver::SolverKind;

#[derive(Debug, Clone, Serialize)]
pub struct BHIReport {
    pub w_size: usize,
    /// Number of ordered pairs `(x, y) ∈ W²` the supremum ranges over.
    pub probe_pairs: usize,
    pub measured_hb: f64,
    /// Pair attaining the supremum: `u/v` is largest at the first node and
    /// smallest at the second.
    pub witness: (usize, usize),
}

/// `sup_{x, y ∈ W} u(x) v(y) / (u(y) v(x))`.
///
/// The double ratio factors as `(u/v)(x) / (u/v)(y)`, so the supremum over
/// all pairs is the ratio of the extreme values of `u/v` on `W` and is
/// computed exactly in one pass.
pub fn boundary_harnack_ratio(u: &[f64], v: &[f64], w: &NodeSet) -> Result<BHIReport, PotentialError> {
    check_len("u", u.len(), w.universe())?;
    check_len("v", v.len(), w.universe())?;
    if w.is_empty() {
        return Err(PotentialError::EmptySet);
    }
    let mut hi = (f64::NEG_INFINITY, 0);
    let mut lo = (f64::INFINITY, 0);
    for i in w.iter() {
        for (which, f) in [("u", u), ("v", v)] {
            if !(f[i] > 0.0) {
                return Err(PotentialError::NonPositiveFunction {
                    which,
                    node: i,
                    value: f[i],
                });
            }
        }
        let q = u[i] / v[i];
        if q > hi.0 {
            hi = (q, i);
        }
        if q < lo.0 {
            lo = (q, i);
        }
    }
    Ok(BHIReport {
        w_size: w.len(),
        probe_pairs: w.len() * w.len(),
        measured_hb: hi.0 / lo.0,
        witness: (hi.1, lo.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BhiOptions {
    /// Ratio between the radii of `V` and `W`.
    pub a: f64,
    /// Number of single-node spikes (height 1 over an `ε` background).
    pub spikes: usize,
    /// Number of data sets with i.i.d. log-uniform values on `[ε, 1]`.
    pub random: usize,
    /// Lower end of the data range; keeps every solution positive on every
    /// component of `V`.
    pub epsilon: f64,
    /// Spikes are placed only at arc nodes whose distance to `∂D` is at least
    /// this fraction of the largest such distance along the arc.
    pub spike_clearance: f64,
}

impl Default for BhiOptions {
    fn default() -> Self {
        BhiOptions {
            a: 2.0,
            spikes: 0,
            random: 64,
            epsilon: 1e-3,
            spike_clearance: 0.25,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BhiExperiment {
    pub xi: Point,
    pub r: f64,
    pub options: BhiOptions,
    pub v_size: usize,
    pub arc_size: usize,
    pub functions: usize,
    pub report: BHIReport,
    /// Indices of the function pair attaining `measured_hb`.
    pub pair: (usize, usize),
}

/// Largest boundary Harnack ratio among solutions on
/// `V = B_{a r}(ξ) ∩ D` that vanish on `∂D` (zero ghost data), measured on
/// `W = B_r(ξ) ∩ D`.
///
/// Data on the inner arc `∂V ∩ D` are either i.i.d. log-uniform values on
/// `[ε, 1]` or `ε` plus a unit spike at one arc node. Spikes avoid the corners where the arc meets
/// `∂D`: there the kernels depend on the corner angle rather than on the
/// boundary behaviour near `ξ`. The ratio is maximized over all pairs of the
/// resulting solutions.
pub fn bhi_experiment(
    oracle: &GreenOracle,
    xi: Point,
    r: f64,
    opts: &BhiOptions,
    seed: u64,
) -> Result<BhiExperiment, PotentialError> {
    if !(r > 0.0 && opts.a > 1.0 && opts.epsilon > 0.0 && (0.0..=1.0).contains(&opts.spike_clearance))
        || opts.spikes + opts.random < 2
    {
        return Err(PotentialError::InvalidParameter {
            name: "bhi",
            reason: format!(
                "need r > 0, a > 1, ε > 0 and at least two functions, got r = {r}, a = {}, ε = {}, {} functions",
                opts.a,
                opts.epsilon,
                opts.spikes + opts.random
            ),
        });
    }
    let grid = oracle.grid();
    let n = grid.interior_count();
    let v_set = NodeSet::from_predicate(n, |i| grid.point(i).dist(xi) < opts.a * r);
    let w_set = NodeSet::from_predicate(n, |i| grid.point(i).dist(xi) < r);
    if w_set.is_empty() {
        return Err(PotentialError::EmptySet);
    }
    let local = LocalProblem::new(oracle.op(), &v_set, SolverKind::Direct, oracle.solver_tol())?;

    // order the arc by angle about its mean direction so it is never cut
    let mean = local
        .outer()
        .iter()
        .fold(Point::ORIGIN, |acc, &j| acc + (grid.point(j) - xi));
    let mut arc: Vec<(usize, f64)> = local
        .outer()
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            let d = grid.point(j) - xi;
            (k, (mean.x * d.y - mean.y * d.x).atan2(mean.dot(d)))
        })
        .collect();
    arc.sort_by(|a, b| a.1.total_cmp(&b.1));
    let m = arc.len();
    let clearance: Vec<f64> = local
        .outer()
        .iter()
        .map(|&j| grid.shape().boundary_distance(grid.point(j)))
        .collect();
    let reach = clearance.iter().copied().fold(0.0, f64::max);
    let eligible: Vec<usize> = arc
        .iter()
        .map(|a| a.0)
        .filter(|&k| clearance[k] >= opts.spike_clearance * reach)
        .collect();
    let spikes = opts.spikes.min(eligible.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..opts.random).map(|_| rng.random()).collect();
    let data: Vec<Vec<f64>> = (0..spikes)
        .map(|s| {
            let mut g = vec![opts.epsilon; m];
            g[eligible[(2 * s + 1) * eligible.len() / (2 * spikes)]] += 1.0;
            g
        })
        .chain(seeds.iter().map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (0..m).map(|_| opts.epsilon.powf(rng.random::<f64>())).collect()
        }))
        .collect();

    let fields: Vec<Vec<f64>> = data
        .par_iter()
        .map(|g| {
            let w = local.solve(g)?;
            let mut full = vec![0.0; n];
            for (&i, v) in local.members().iter().zip(w) {
                full[i] = v;
            }
            Ok(full)
        })
        .collect::<Result<_, PotentialError>>()?;

    let k = fields.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let reports = pairs
        .par_iter()
        .map(|&(i, j)| boundary_harnack_ratio(&fields[i], &fields[j], &w_set).map(|r| (r, (i, j))))
        .collect::<Result<Vec<_>, _>>()?;
    let (report, pair) = reports
        .into_iter()
        .max_by(|a, b| a.0.measured_hb.total_cmp(&b.0.measured_hb))
        .expect("at least one pair");
    Ok(BhiExperiment {
        xi,
        r,
        options: *opts,
        v_size: v_set.len(),
        arc_size: m,
        functions: k,
        report,
        pair,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::domain::{rasterize, DomainSpec};
    use crate::elliptic::{discretize, OperatorSpec};

    #[test]
    fn identical_and_proportional_functions() {
        let w = NodeSet::full(5);
        let u = [1.0, 2.0, 3.0, 0.5, 7.0];
        assert_eq!(boundary_harnack_ratio(&u, &u, &w).unwrap().measured_hb, 1.0);
        let v: Vec<f64> = u.iter().map(|x| 2.0 * x).collect();
        assert_eq!(boundary_harnack_ratio(&u, &v, &w).unwrap().measured_hb, 1.0);
    }

    #[test]
    fn witness_attains_the_ratio() {
        let w = NodeSet::from_nodes(4, [0, 1, 3]);
        let u = [1.0, 4.0, -1.0, 1.0];
        let v = [1.0, 1.0, -1.0, 2.0];
        let rep = boundary_harnack_ratio(&u, &v, &w).unwrap();
        assert_eq!(rep.measured_hb, 8.0);
        assert_eq!(rep.witness, (1, 3));
        assert_eq!(rep.probe_pairs, 9);
        let bad = [1.0, 0.0, 1.0, 1.0];
        assert!(matches!(
            boundary_harnack_ratio(&bad, &v, &w),
            Err(PotentialError::NonPositiveFunction {
                which: "u",
                node: 1,
                ..
            })
        ));
    }

    proptest! {
        #[test]
        fn invariant_under_rescaling(
            u in prop::collection::vec(0.01f64..10.0, 12),
            v in prop::collection::vec(0.01f64..10.0, 12),
            a in -20i32..20,
            b in -20i32..20,
        ) {
            let w = NodeSet::full(12);
            let base = boundary_harnack_ratio(&u, &v, &w).unwrap().measured_hb;
            prop_assert!(base >= 1.0);
            let (sa, sb) = (2f64.powi(a), 2f64.powi(b));
            let us: Vec<f64> = u.iter().map(|x| sa * x).collect();
            let vs: Vec<f64> = v.iter().map(|x| sb * x).collect();
            prop_assert_eq!(boundary_harnack_ratio(&us, &vs, &w).unwrap().measured_hb, base);
        }
    }

    #[test]
    fn disk_experiment_is_finite() {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, 1.0 / 32.0).unwrap());
        let o = GreenOracle::new(discretize(&OperatorSpec::laplacian(), &g).unwrap());
        let opts = BhiOptions {
            spikes: 8,
            random: 2,
            ..Default::default()
        };
        let e = bhi_experiment(&o, Point::new(1.0, 0.0), 0.2, &opts, 3).unwrap();
        assert!(e.report.measured_hb >= 1.0 && e.report.measured_hb.is_finite());
        assert_eq!(e.functions, 10);
        let again = bhi_experiment(&o, Point::new(1.0, 0.0), 0.2, &opts, 3).unwrap();
        assert_eq!(again.report.measured_hb, e.report.measured_hb);
    }
}

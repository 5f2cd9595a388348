use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{LocalProblem, PotentialError};
use crate::geometry::Point;
use crate::green::GreenOracle;
use crate::nodeset::NodeSet;
use crate::solver::SolverKind;

#[derive(Debug, Clone, Serialize)]
pub struct HarnackReport {
    pub center: usize,
    pub center_point: Point,
    pub radius: f64,
    pub measured_h: f64,
    pub trials: usize,
    /// Running maximum after each trial.
    pub history: Vec<f64>,
    pub extremal: String,
}

enum Datum {
    Spike(usize),
    Random(u64),
}

/// Empirical Harnack constant of `L_t`-harmonic functions on the Euclidean
/// ball `B_r(center)`, measured on `B_{r/2}(center)`.
///
/// The first trials are single-node spikes at evenly spaced points of the
/// discrete sphere (these maximize both ratios among nonnegative data); the
/// remaining ones use i.i.d. uniform data from a seeded generator.
pub fn harnack_constant(
    oracle: &GreenOracle,
    center: usize,
    r: f64,
    trials: usize,
    seed: u64,
) -> Result<HarnackReport, PotentialError> {
    let op = oracle.op();
    let grid = op.grid();
    if center >= grid.interior_count() {
        return Err(PotentialError::InvalidParameter {
            name: "center",
            reason: format!("node {center} is not an interior node"),
        });
    }
    if !(r > 0.0) || trials == 0 {
        return Err(PotentialError::InvalidParameter {
            name: "r",
            reason: format!("need r > 0 and trials >= 1, got r = {r}, trials = {trials}"),
        });
    }
    let c = grid.point(center);
    let available = grid.shape().boundary_distance(c);
    if available < 2.0 * r {
        return Err(PotentialError::BallNotContained {
            x: c.x,
            y: c.y,
            radius: r,
            required: 2.0 * r,
            available,
        });
    }
    let ball = NodeSet::from_predicate(grid.interior_count(), |i| grid.point(i).dist(c) < r);
    let local = LocalProblem::new(op, &ball, SolverKind::Direct, oracle.solver_tol())?;
    let center_pos = local
        .members()
        .iter()
        .position(|&i| i == center)
        .expect("center lies in its ball");
    let inner: Vec<usize> = local
        .members()
        .iter()
        .enumerate()
        .filter(|(_, &i)| grid.point(i).dist(c) <= 0.5 * r)
        .map(|(k, _)| k)
        .collect();

    let mut sphere: Vec<(usize, f64)> = local
        .outer()
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            let d = grid.point(j) - c;
            (k, d.y.atan2(d.x))
        })
        .collect();
    sphere.sort_by(|a, b| a.1.total_cmp(&b.1));
    let spikes = trials.min(sphere.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<Datum> = (0..trials)
        .map(|t| {
            if t < spikes {
                Datum::Spike(sphere[t * sphere.len() / spikes].0)
            } else {
                Datum::Random(rng.random())
            }
        })
        .collect();

    let m = local.outer().len();
    let ratios: Vec<f64> = data
        .par_iter()
        .map(|d| {
            let g: Vec<f64> = match *d {
                Datum::Spike(k) => {
                    let mut g = vec![0.0; m];
                    g[k] = 1.0;
                    g
                }
                Datum::Random(s) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(s);
                    (0..m).map(|_| rng.random::<f64>()).collect()
                }
            };
            let u = local.solve(&g)?;
            let uc = u[center_pos];
            let (lo, hi) = inner
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), &k| (lo.min(u[k]), hi.max(u[k])));
            if !(lo > 0.0) {
                return Err(PotentialError::NonPositiveFunction {
                    which: "harmonic trial",
                    node: center,
                    value: lo,
                });
            }
            Ok((hi / uc).max(uc / lo))
        })
        .collect::<Result<_, _>>()?;

    let mut history = Vec::with_capacity(trials);
    let mut best = (1.0f64, 0usize);
    for (t, &q) in ratios.iter().enumerate() {
        if q > best.0 {
            best = (q, t);
        }
        history.push(best.0);
    }
    let extremal = match data[best.1] {
        Datum::Spike(k) => {
            let p = grid.point(local.outer()[k]);
            format!("spike at boundary node {} ({:.6}, {:.6})", local.outer()[k], p.x, p.y)
        }
        Datum::Random(s) => format!("uniform random data, trial {} (stream seed {s})", best.1),
    };
    Ok(HarnackReport {
        center,
        center_point: c,
        radius: r,
        measured_h: best.0,
        trials,
        history,
        extremal,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domain::{rasterize, DomainSpec};
    use crate::elliptic::{discretize, OperatorSpec};

    fn oracle(h: f64, spec: &OperatorSpec) -> GreenOracle {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, h).unwrap());
        GreenOracle::new(discretize(spec, &g).unwrap())
    }

    #[test]
    fn history_is_nondecreasing_and_at_least_one() {
        let o = oracle(1.0 / 32.0, &OperatorSpec::laplacian());
        let c = o.grid().node_at(Point::ORIGIN).unwrap();
        let rep = harnack_constant(&o, c, 0.4, 80, 7).unwrap();
        assert!(rep.measured_h >= 1.0);
        assert!(rep.history.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(rep.history.len(), 80);
        assert_eq!(*rep.history.last().unwrap(), rep.measured_h);
    }

    #[test]
    fn ball_must_have_margin() {
        let o = oracle(1.0 / 16.0, &OperatorSpec::laplacian());
        let c = o.grid().node_at(Point::new(0.5, 0.0)).unwrap();
        assert!(matches!(
            harnack_constant(&o, c, 0.3, 4, 0),
            Err(PotentialError::BallNotContained { .. })
        ));
    }

    #[test]
    fn zeroth_order_term_raises_the_constant() {
        let lap = oracle(1.0 / 32.0, &OperatorSpec::laplacian());
        let schr = oracle(1.0 / 32.0, &OperatorSpec::laplacian_plus(1.0));
        let c = lap.grid().node_at(Point::ORIGIN).unwrap();
        let a = harnack_constant(&lap, c, 0.5, 200, 1).unwrap().measured_h;
        let b = harnack_constant(&schr, c, 0.5, 200, 1).unwrap().measured_h;
        assert!(b > a, "{b} <= {a}");
    }
}

use serde::Serialize;

use super::{linear_fit, LocalProblem, PotentialError};
use crate::geometry::Point;
use crate::green::GreenOracle;
use crate::nodeset::NodeSet;
use crate::solver::SolverKind;

#[derive(Debug, Clone, Serialize)]
pub struct RmpReport {
    pub center: usize,
    pub center_point: Point,
    pub pole: usize,
    pub theta: f64,
    pub radii: Vec<f64>,
    /// `q(r) = u(center) / ū(center)` for each radius.
    pub q: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub eta_hat: f64,
    pub fit_residual: f64,
    /// Whether `q` is strictly decreasing in `r`.
    pub monotone: bool,
}

/// Decay rate of the relative maximum principle.
///
/// `ū = G^θ(·, pole)` is `L`-superharmonic away from its pole because
/// `L ū = θ ū ≥ 0`. On each Euclidean ball `B_r(center)` the greatest
/// `L`-harmonic minorant `u` (Dirichlet data `ū` on the discrete sphere) is
/// compared with `ū` at the center; `ln q` is fitted linearly in `r` and
/// `η̂ = exp(slope)`.
///
/// `theta` defaults to `τ/2` from the spectral data attached to the
/// oracle's operator.
pub fn relative_max_principle_rate(
    oracle: &GreenOracle,
    theta: Option<f64>,
    center: usize,
    pole: usize,
    radii: &[f64],
) -> Result<RmpReport, PotentialError> {
    let op = oracle.op();
    let grid = op.grid();
    let n = grid.interior_count();
    for (name, node) in [("center", center), ("pole", pole)] {
        if node >= n {
            return Err(PotentialError::InvalidParameter {
                name,
                reason: format!("node {node} is not an interior node"),
            });
        }
    }
    if radii.len() < 2 || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PotentialError::InvalidParameter {
            name: "radii",
            reason: "need at least two positive, strictly increasing radii".into(),
        });
    }
    let spectral = op.spectral();
    let theta = match (theta, spectral) {
        (Some(t), _) => t,
        (None, Some(s)) => s.theta,
        (None, None) => return Err(PotentialError::ThetaUnavailable),
    };
    if let Some(s) = spectral {
        if !(theta >= 0.0 && theta < s.tau_estimate) {
            return Err(PotentialError::InvalidTheta {
                theta,
                tau: s.tau_estimate,
            });
        }
    }

    let c = grid.point(center);
    let r_max = *radii.last().unwrap();
    let h = grid.h();
    let available = grid.shape().boundary_distance(c);
    if available <= r_max + 2.0 * h {
        return Err(PotentialError::BallNotContained {
            x: c.x,
            y: c.y,
            radius: r_max,
            required: r_max + 2.0 * h,
            available,
        });
    }
    let pole_gap = grid.point(pole).dist(c);
    if pole_gap <= r_max + 2.0 * h {
        return Err(PotentialError::InvalidParameter {
            name: "pole",
            reason: format!("pole at distance {pole_gap} must lie outside the largest ball (radius {r_max})"),
        });
    }

    let shifted = oracle.shifted(theta, true)?;
    let ubar = shifted.column(pole)?;
    let q = radii
        .iter()
        .map(|&r| {
            let ball = NodeSet::from_predicate(n, |i| grid.point(i).dist(c) < r);
            let local = LocalProblem::new(op, &ball, SolverKind::Auto, oracle.solver_tol())?;
            let u = local.solve_from_field(&ubar.values)?;
            Ok(u[center] / ubar[center])
        })
        .collect::<Result<Vec<f64>, PotentialError>>()?;

    let logs: Vec<f64> = q.iter().map(|v| v.ln()).collect();
    let (intercept, slope, fit_residual) = linear_fit(radii, &logs);
    Ok(RmpReport {
        center,
        center_point: c,
        pole,
        theta,
        radii: radii.to_vec(),
        monotone: q.windows(2).all(|w| w[1] < w[0]),
        q,
        slope,
        intercept,
        eta_hat: slope.exp(),
        fit_residual,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domain::{rasterize, DomainSpec};
    use crate::elliptic::{discretize, principal_eigenvalue, OperatorSpec};

    fn square_oracle(h: f64) -> GreenOracle {
        let g = Arc::new(rasterize(&DomainSpec::Square { side: 4.0 }, h).unwrap());
        GreenOracle::new(discretize(&OperatorSpec::laplacian(), &g).unwrap())
    }

    #[test]
    fn zero_theta_is_degenerate() {
        let o = square_oracle(1.0 / 16.0);
        let g = o.grid().clone();
        let c = g.node_at(Point::new(-0.5, 0.0)).unwrap();
        let p = g.node_at(Point::new(1.25, 0.0)).unwrap();
        let rep = relative_max_principle_rate(&o, Some(0.0), c, p, &[0.5, 0.75, 1.0]).unwrap();
        for q in &rep.q {
            assert!((q - 1.0).abs() < 1e-9, "{q}");
        }
        assert!((rep.eta_hat - 1.0).abs() < 1e-9);
    }

    #[test]
    fn positive_theta_decays() {
        let o = square_oracle(1.0 / 16.0);
        let info = principal_eigenvalue(o.op(), 1e-8).unwrap();
        let o = GreenOracle::new(o.op().clone().with_spectral(info));
        let g = o.grid().clone();
        let c = g.node_at(Point::new(-0.5, 0.0)).unwrap();
        let p = g.node_at(Point::new(1.25, 0.0)).unwrap();
        let rep = relative_max_principle_rate(&o, None, c, p, &[0.5, 0.75, 1.0]).unwrap();
        assert!(rep.monotone);
        assert!(rep.eta_hat > 0.0 && rep.eta_hat < 1.0);
        assert!(matches!(
            relative_max_principle_rate(&o, Some(10.0), c, p, &[0.5, 1.0]),
            Err(PotentialError::InvalidTheta { .. })
        ));
    }

    #[test]
    fn needs_theta_source() {
        let o = square_oracle(0.25);
        assert!(matches!(
            relative_max_principle_rate(&o, None, 0, 1, &[0.5, 1.0]),
            Err(PotentialError::ThetaUnavailable)
        ));
    }
}

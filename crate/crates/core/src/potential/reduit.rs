use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_len, PotentialError};
use crate::domain::GridDomain;
use crate::elliptic::DiscreteOperator;
use crate::nodeset::NodeSet;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReduitOptions {
    /// Stop once the largest nodewise update of a sweep falls below
    /// `tol · max(u on A)`.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor in `(0, 2)`; `None` picks the model-problem
    /// optimum for the lattice size.
    pub omega: Option<f64>,
}

impl Default for ReduitOptions {
    fn default() -> Self {
        ReduitOptions {
            tol: 1e-8,
            max_sweeps: 100_000,
            omega: None,
        }
    }
}

/// The reduit `R_u^A` and its convergence record.
#[derive(Debug, Clone, Serialize)]
pub struct ReduitResult {
    pub values: Vec<f64>,
    /// Nodes of `A` where the obstacle binds.
    pub active_set: NodeSet,
    pub iterations: usize,
    /// Complementarity residual `max |min(v − ψ, (A v)_i / a_ii)|`, relative
    /// to `max ψ`.
    pub residual: f64,
    pub omega: f64,
}

/// `R_u^A` with default options.
pub fn reduit(op: &DiscreteOperator, u: &[f64], a: &NodeSet) -> Result<ReduitResult, PotentialError> {
    reduit_with(op, u, a, &ReduitOptions::default())
}

/// Least nonnegative discrete supersolution dominating `u` on `a`:
/// `min { v : M v ≥ 0, v ≥ u·1_A, v ≥ 0 }` with zero ghost values, solved by
/// projected successive over-relaxation in red-black order.
pub fn reduit_with(
    op: &DiscreteOperator,
    u: &[f64],
    a: &NodeSet,
    opts: &ReduitOptions,
) -> Result<ReduitResult, PotentialError> {
    obstacle(op.matrix(), op.grid(), u, a, opts)
}

/// The reduit for the adjoint operator `L*`, whose matrix is the transpose.
pub fn reduit_adjoint(
    op: &DiscreteOperator,
    u: &[f64],
    a: &NodeSet,
    opts: &ReduitOptions,
) -> Result<ReduitResult, PotentialError> {
    obstacle(&op.transpose_matrix(), op.grid(), u, a, opts)
}

fn obstacle(
    m: &CsrMatrix,
    grid: &GridDomain,
    u: &[f64],
    a: &NodeSet,
    opts: &ReduitOptions,
) -> Result<ReduitResult, PotentialError> {
    let n = m.n_rows();
    check_len("field", u.len(), n)?;
    check_len("obstacle set universe", a.universe(), n)?;
    if let Some((node, &value)) = u.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(PotentialError::NegativeInput { node, value });
    }
    if !(opts.tol > 0.0) || opts.max_sweeps == 0 {
        return Err(PotentialError::InvalidParameter {
            name: "tol",
            reason: format!(
                "tol must be > 0 and max_sweeps >= 1, got {} and {}",
                opts.tol, opts.max_sweeps
            ),
        });
    }
    let (nx, ny) = grid.lattice_dims();
    let omega = opts
        .omega
        .unwrap_or_else(|| 2.0 / (1.0 + (PI / nx.max(ny).max(2) as f64).sin()));
    if !(omega > 0.0 && omega < 2.0) {
        return Err(PotentialError::InvalidParameter {
            name: "omega",
            reason: format!("must lie in (0, 2), got {omega}"),
        });
    }

    let psi: Vec<f64> = (0..n).map(|i| if a.contains(i) { u[i] } else { 0.0 }).collect();
    let scale = psi.iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(ReduitResult {
            values: vec![0.0; n],
            active_set: NodeSet::empty(n),
            iterations: 0,
            residual: 0.0,
            omega,
        });
    }

    let (rp, ci, vals) = (m.row_ptr(), m.col_idx(), m.values());
    let diag = m.diagonal();
    let mut colors: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for i in 0..n {
        let (li, lj) = grid.lattice_coords(i);
        colors[(li + lj) % 2].push(i);
    }

    let mut v = psi.clone();
    let threshold = opts.tol * scale;
    let mut iterations = 0;
    let mut last_update = f64::INFINITY;
    while iterations < opts.max_sweeps {
        iterations += 1;
        let mut update = 0.0f64;
        for color in &colors {
            for &i in color {
                let mut off = 0.0;
                for k in rp[i]..rp[i + 1] {
                    let j = ci[k];
                    if j != i {
                        off += vals[k] * v[j];
                    }
                }
                let gs = -off / diag[i];
                let new = (v[i] + omega * (gs - v[i])).max(psi[i]);
                update = update.max((new - v[i]).abs());
                v[i] = new;
            }
        }
        last_update = update;
        if update <= threshold {
            break;
        }
    }
    if last_update > threshold {
        return Err(PotentialError::NoConvergence {
            sweeps: iterations,
            residual: last_update / scale,
        });
    }

    let mv = m.matvec(&v);
    let residual = (0..n)
        .map(|i| (v[i] - psi[i]).min(mv[i] / diag[i]).abs())
        .fold(0.0, f64::max)
        / scale;
    let active_set = NodeSet::from_predicate(n, |i| a.contains(i) && v[i] - psi[i] <= 10.0 * threshold);
    Ok(ReduitResult {
        values: v,
        active_set,
        iterations,
        residual,
        omega,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domain::{rasterize, DomainSpec};
    use crate::elliptic::{discretize, OperatorSpec};
    use crate::geometry::Point;

    fn disk_op(h: f64, spec: &OperatorSpec) -> DiscreteOperator {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, h).unwrap());
        discretize(spec, &g).unwrap()
    }

    fn tight() -> ReduitOptions {
        ReduitOptions {
            tol: 1e-13,
            ..Default::default()
        }
    }

    #[test]
    fn empty_obstacle_gives_zero() {
        let op = disk_op(1.0 / 16.0, &OperatorSpec::laplacian());
        let r = reduit(&op, &vec![1.0; op.n()], &NodeSet::empty(op.n())).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0));
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn full_obstacle_reproduces_superharmonic_input() {
        let op = disk_op(1.0 / 16.0, &OperatorSpec::laplacian_plus(1.0));
        // constants are superharmonic for c ≥ 0
        let u = vec![2.5; op.n()];
        let r = reduit_with(&op, &u, &NodeSet::full(op.n()), &tight()).unwrap();
        assert!(r.values.iter().all(|&v| v == 2.5));
        assert_eq!(r.active_set.len(), op.n());
    }

    #[test]
    fn result_is_a_supersolution_above_the_obstacle() {
        let op = disk_op(1.0 / 32.0, &OperatorSpec::laplacian());
        let g = op.grid().clone();
        let a = NodeSet::ball(&g, Point::new(0.3, -0.1), 0.3);
        let u: Vec<f64> = g.points().map(|p| 1.0 + p.x * p.y).collect();
        let r = reduit_with(&op, &u, &a, &tight()).unwrap();
        let mv = op.matrix().matvec(&r.values);
        for i in 0..op.n() {
            assert!(r.values[i] >= 0.0);
            assert!(mv[i] >= -1e-8, "{i}: {}", mv[i]);
            if a.contains(i) {
                assert!(r.values[i] >= u[i]);
            }
            if !r.active_set.contains(i) {
                assert!(mv[i].abs() < 1e-8);
            }
        }
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn rejects_negative_input_and_bad_omega() {
        let op = disk_op(0.25, &OperatorSpec::laplacian());
        let mut u = vec![1.0; op.n()];
        u[1] = -1.0;
        assert!(matches!(
            reduit(&op, &u, &NodeSet::full(op.n())),
            Err(PotentialError::NegativeInput { node: 1, .. })
        ));
        let opts = ReduitOptions {
            omega: Some(2.0),
            ..Default::default()
        };
        assert!(reduit_with(&op, &vec![1.0; op.n()], &NodeSet::full(op.n()), &opts).is_err());
    }

    #[test]
    fn sweep_cap_reports_no_convergence() {
        let op = disk_op(1.0 / 32.0, &OperatorSpec::laplacian());
        let g = op.grid().clone();
        let a = NodeSet::ball(&g, Point::ORIGIN, 0.25);
        let opts = ReduitOptions {
            max_sweeps: 3,
            ..Default::default()
        };
        assert!(matches!(
            reduit_with(&op, &vec![1.0; op.n()], &a, &opts),
            Err(PotentialError::NoConvergence { sweeps: 3, .. })
        ));
    }
}

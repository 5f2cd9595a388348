use log::warn;

use super::{GreenError, GreenOracle};
use crate::elliptic::DiscreteOperator;
use crate::nodeset::NodeSet;
use crate::solver::{LinearSolver, SolverKind};

/// Replace `u` on `subdomain` by the `L_t`-harmonic function with the same
/// values on the rest of the grid (and `ghost` on the ghost layer, zero when
/// absent). Values outside `subdomain` are returned unchanged.
pub fn solve_on_subdomain(
    op: &DiscreteOperator,
    u: &[f64],
    ghost: Option<&[f64]>,
    subdomain: &NodeSet,
    solver_kind: SolverKind,
    tol: f64,
) -> Result<Vec<f64>, GreenError> {
    let n = op.n();
    if u.len() != n {
        return Err(GreenError::DimensionMismatch {
            what: "field",
            got: u.len(),
            expected: n,
        });
    }
    if subdomain.is_empty() {
        return Err(GreenError::EmptySubdomain);
    }
    if !subdomain.is_connected(op.grid()) {
        return Err(GreenError::DisconnectedSubdomain);
    }
    let a = op.matrix();
    let members = subdomain.as_slice();
    let sub = a.principal_submatrix(members);
    let ghost_coupling = ghost.map(|g| op.boundary_coupling().matvec(g));
    let rhs: Vec<f64> = members
        .iter()
        .map(|&i| {
            let outside: f64 = a
                .row(i)
                .filter(|(j, _)| !subdomain.contains(*j))
                .map(|(j, v)| v * u[j])
                .sum();
            -outside - ghost_coupling.as_ref().map_or(0.0, |g| g[i])
        })
        .collect();
    let w = LinearSolver::new(&sub, solver_kind, tol)?.solve(&rhs)?;
    let mut out = u.to_vec();
    for (&i, v) in members.iter().zip(w) {
        out[i] = v;
    }
    Ok(out)
}

/// Greatest `L_t`-harmonic minorant of `u` on `subdomain`: the Dirichlet
/// solution on the subdomain matching `u` on its discrete boundary.
///
/// For superharmonic `u` the result is `≤ u`; a warning is logged otherwise.
pub fn greatest_harmonic_minorant(
    oracle: &GreenOracle,
    u: &[f64],
    subdomain: &NodeSet,
) -> Result<Vec<f64>, GreenError> {
    let out = solve_on_subdomain(oracle.op(), u, None, subdomain, SolverKind::Auto, oracle.solver_tol())?;
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(i) = subdomain.iter().find(|&i| out[i] > u[i] + 1e-9 * scale) {
        warn!(
            "harmonic minorant exceeds the input at node {i} ({} > {}); the input is not superharmonic",
            out[i], u[i]
        );
    }
    Ok(out)
}

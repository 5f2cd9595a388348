use log::debug;
use serde::{Deserialize, Serialize};

use super::{DiscreteOperator, EllipticError};
use crate::solver::{LinearSolver, SolverKind};

/// Generalized principal eigenvalue of a Dirichlet operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralInfo {
    pub tau_estimate: f64,
    pub theta: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl SpectralInfo {
    fn new(tau: f64, iterations: usize, residual: f64) -> Self {
        SpectralInfo {
            tau_estimate: tau,
            theta: tau / 2.0,
            iterations,
            residual,
        }
    }

    /// Spectral data of `L - s·id`.
    pub fn shifted(&self, s: f64) -> Self {
        SpectralInfo::new(self.tau_estimate - s, self.iterations, self.residual)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub max_iterations: usize,
    pub solver: SolverKind,
    /// Refactorize once near the eigenvalue to accelerate convergence.
    pub accelerate: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            max_iterations: 1000,
            solver: SolverKind::Auto,
            accelerate: true,
        }
    }
}

pub fn principal_eigenvalue(op: &DiscreteOperator, tol: f64) -> Result<SpectralInfo, EllipticError> {
    principal_eigenvalue_with(op, tol, EigenOptions::default()).map(|(info, _)| info)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Inverse power iteration for the eigenvalue of smallest real part.
///
/// Starts unshifted; once the estimate settles (relative change below 1e-4)
/// the matrix is refactorized once at `0.95·λ`, which keeps the shift below
/// the principal eigenvalue while making the iteration converge in a
/// handful of steps. Returns the positive, unit-norm eigenvector as well.
pub fn principal_eigenvalue_with(
    op: &DiscreteOperator,
    tol: f64,
    opts: EigenOptions,
) -> Result<(SpectralInfo, Vec<f64>), EllipticError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(EllipticError::InvalidTolerance(tol));
    }
    let a = op.matrix();
    let n = a.n_rows();
    let mut sigma = 0.0;
    let mut solver = LinearSolver::new(a, opts.solver, 1e-13)?;
    let mut v = vec![1.0; n];
    normalize(&mut v);
    let mut lambda = f64::NAN;
    let mut residual = f64::INFINITY;
    let mut shifted = false;
    for iter in 1..=opts.max_iterations {
        let mut w = solver.solve(&v)?;
        let mu = dot(&v, &w);
        let estimate = sigma + 1.0 / mu;
        let settled = (estimate - lambda).abs() < 1e-4 * estimate.abs();
        lambda = estimate;
        if dot(&w, &vec![1.0; n]) < 0.0 {
            w.iter_mut().for_each(|x| *x = -*x);
        }
        normalize(&mut w);
        v = w;
        let av = a.matvec(&v);
        residual = av
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - lambda * y).powi(2))
            .sum::<f64>()
            .sqrt();
        debug!("inverse iteration {iter}: λ = {lambda}, residual = {residual:.3e}");
        if residual < tol {
            if let Some((node, &value)) = v.iter().enumerate().find(|(_, x)| **x <= 0.0) {
                return Err(EllipticError::NonPositiveEigenvector { node, value });
            }
            return Ok((SpectralInfo::new(lambda, iter, residual), v));
        }
        if opts.accelerate && !shifted && settled && lambda > 0.0 {
            shifted = true;
            sigma = 0.95 * lambda;
            solver = LinearSolver::new(&a.add_identity(-sigma), opts.solver, 1e-13)?;
        }
    }
    Err(EllipticError::NoConvergence {
        max_iterations: opts.max_iterations,
        residual,
    })
}

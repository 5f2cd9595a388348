//! Sparse linear solvers for the assembled operators.
//!
//! Small and medium systems are factorized once with a sparse LU and reused
//! for every right-hand side (including transposed solves). Systems beyond
//! [`AUTO_DIRECT_LIMIT`] unknowns fall back to ILU(0)-preconditioned BiCGSTAB.

use std::sync::OnceLock;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::Mat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::CsrMatrix;

pub const AUTO_DIRECT_LIMIT: usize = 300_000;
pub const DEFAULT_ITERATIVE_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Direct,
    Iterative,
    #[default]
    Auto,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("sparse LU factorization failed: {0}")]
    Factorization(String),
    #[error(
        "iterative solver stalled after {iterations} iterations (relative residual {residual:.3e}); \
         a direct solve is recommended"
    )]
    SolverDivergence { iterations: usize, residual: f64 },
    #[error("right-hand side has length {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

enum Backend {
    Direct(Box<Lu<usize, f64>>),
    Iterative {
        ilu: Ilu0,
        ilu_t: OnceLock<(CsrMatrix, Ilu0)>,
    },
}

/// A reusable solver for `A x = b` and `Aᵀ x = b`.
pub struct LinearSolver {
    matrix: CsrMatrix,
    backend: Backend,
    tol: f64,
}

impl std::fmt::Debug for LinearSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearSolver")
            .field("n", &self.matrix.n_rows())
            .field("kind", &self.kind())
            .field("tol", &self.tol)
            .finish()
    }
}

impl LinearSolver {
    pub fn new(matrix: &CsrMatrix, kind: SolverKind, tol: f64) -> Result<Self, SolverError> {
        Self::with_limit(matrix, kind, tol, AUTO_DIRECT_LIMIT)
    }

    /// As [`LinearSolver::new`] with a custom direct/iterative threshold for
    /// [`SolverKind::Auto`].
    pub fn with_limit(
        matrix: &CsrMatrix,
        kind: SolverKind,
        tol: f64,
        direct_limit: usize,
    ) -> Result<Self, SolverError> {
        let direct = match kind {
            SolverKind::Direct => true,
            SolverKind::Iterative => false,
            SolverKind::Auto => matrix.n_rows() <= direct_limit,
        };
        let backend = if direct {
            let lu = matrix
                .to_faer()
                .sp_lu()
                .map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
            Backend::Direct(Box::new(lu))
        } else {
            Backend::Iterative {
                ilu: Ilu0::new(matrix),
                ilu_t: OnceLock::new(),
            }
        };
        Ok(LinearSolver {
            matrix: matrix.clone(),
            backend,
            tol,
        })
    }

    pub fn kind(&self) -> SolverKind {
        match self.backend {
            Backend::Direct(_) => SolverKind::Direct,
            Backend::Iterative { .. } => SolverKind::Iterative,
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
        self.solve_impl(rhs, false)
    }

    pub fn solve_transpose(&self, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
        self.solve_impl(rhs, true)
    }

    fn solve_impl(&self, rhs: &[f64], transpose: bool) -> Result<Vec<f64>, SolverError> {
        let n = self.matrix.n_rows();
        if rhs.len() != n {
            return Err(SolverError::DimensionMismatch {
                got: rhs.len(),
                expected: n,
            });
        }
        match &self.backend {
            Backend::Direct(lu) => {
                let mut b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
                if transpose {
                    lu.solve_transpose_in_place(b.as_mut());
                } else {
                    lu.solve_in_place(b.as_mut());
                }
                Ok((0..n).map(|i| b[(i, 0)]).collect())
            }
            Backend::Iterative { ilu, ilu_t } => {
                if transpose {
                    let (at, pre) = ilu_t.get_or_init(|| {
                        let at = self.matrix.transpose();
                        let pre = Ilu0::new(&at);
                        (at, pre)
                    });
                    bicgstab(at, pre, rhs, self.tol)
                } else {
                    bicgstab(&self.matrix, ilu, rhs, self.tol)
                }
            }
        }
    }
}

/// Incomplete LU factorization with the sparsity pattern of the matrix.
struct Ilu0 {
    lu: CsrMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    fn new(a: &CsrMatrix) -> Self {
        let n = a.n_rows();
        let row_ptr = a.row_ptr().to_vec();
        let cols = a.col_idx().to_vec();
        let mut vals = a.values().to_vec();
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                if cols[k] == i {
                    diag_pos[i] = k;
                }
            }
            assert!(diag_pos[i] != usize::MAX, "ILU(0) needs a stored diagonal");
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                pos[cols[k]] = k;
            }
            for k in row_ptr[i]..row_ptr[i + 1] {
                let j = cols[k];
                if j >= i {
                    break;
                }
                let pivot = vals[k] / vals[diag_pos[j]];
                vals[k] = pivot;
                for kk in diag_pos[j] + 1..row_ptr[j + 1] {
                    let target = pos[cols[kk]];
                    if target != usize::MAX {
                        vals[target] -= pivot * vals[kk];
                    }
                }
            }
            for k in row_ptr[i]..row_ptr[i + 1] {
                pos[cols[k]] = usize::MAX;
            }
        }
        let entries: Vec<_> = (0..n)
            .flat_map(|i| (row_ptr[i]..row_ptr[i + 1]).map(move |k| (i, k)))
            .map(|(i, k)| (i, cols[k], vals[k]))
            .collect();
        Ilu0 {
            lu: CsrMatrix::from_triplets(n, n, &entries),
            diag_pos,
        }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let rp = self.lu.row_ptr();
        let ci = self.lu.col_idx();
        let v = self.lu.values();
        let n = r.len();
        for i in 0..n {
            let mut s = r[i];
            for k in rp[i]..self.diag_pos[i] {
                s -= v[k] * z[ci[k]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in self.diag_pos[i] + 1..rp[i + 1] {
                s -= v[k] * z[ci[k]];
            }
            z[i] = s / v[self.diag_pos[i]];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Right-preconditioned BiCGSTAB; convergence is declared on the true
/// relative residual.
fn bicgstab(a: &CsrMatrix, pre: &Ilu0, b: &[f64], tol: f64) -> Result<Vec<f64>, SolverError> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut residual = 1.0;
    for iter in 1..=MAX_ITERATIONS {
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 || omega == 0.0 {
            return Err(SolverError::SolverDivergence {
                iterations: iter,
                residual,
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        pre.apply(&p, &mut phat);
        a.matvec_into(&phat, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bnorm < tol {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            if true_residual(a, &x, b) / bnorm < tol * 10.0 {
                return Ok(x);
            }
            r = residual_vec(a, &x, b);
            continue;
        }
        pre.apply(&s, &mut shat);
        a.matvec_into(&shat, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        residual = norm(&r) / bnorm;
        if residual < tol {
            let actual = true_residual(a, &x, b) / bnorm;
            if actual < tol * 10.0 {
                return Ok(x);
            }
            r = residual_vec(a, &x, b);
        }
    }
    Err(SolverError::SolverDivergence {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

fn residual_vec(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.matvec(x);
    b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
}

fn true_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    norm(&residual_vec(a, x, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn convection_diffusion(m: usize) -> CsrMatrix {
        let idx = |i: usize, j: usize| i * m + j;
        let mut e = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let k = idx(i, j);
                e.push((k, k, 4.5));
                if i > 0 {
                    e.push((k, idx(i - 1, j), -1.5));
                }
                if i + 1 < m {
                    e.push((k, idx(i + 1, j), -1.0));
                }
                if j > 0 {
                    e.push((k, idx(i, j - 1), -1.0));
                }
                if j + 1 < m {
                    e.push((k, idx(i, j + 1), -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(m * m, m * m, &e)
    }

    #[test]
    fn direct_and_iterative_agree() {
        let a = convection_diffusion(30);
        let b: Vec<f64> = (0..900).map(|i| ((i * 7) % 13) as f64 - 6.0).collect();
        let d = LinearSolver::new(&a, SolverKind::Direct, 1e-12).unwrap();
        let it = LinearSolver::new(&a, SolverKind::Iterative, 1e-12).unwrap();
        for transpose in [false, true] {
            let (x, y) = if transpose {
                (d.solve_transpose(&b).unwrap(), it.solve_transpose(&b).unwrap())
            } else {
                (d.solve(&b).unwrap(), it.solve(&b).unwrap())
            };
            let err = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "transpose={transpose} err={err}");
        }
        let x = d.solve(&b).unwrap();
        let r = true_residual(&a, &x, &b) / norm(&b);
        assert!(r < 1e-13);
    }

    #[test]
    fn auto_threshold() {
        let a = convection_diffusion(4);
        let s = LinearSolver::with_limit(&a, SolverKind::Auto, 1e-10, 10).unwrap();
        assert_eq!(s.kind(), SolverKind::Iterative);
        let s = LinearSolver::new(&a, SolverKind::Auto, 1e-10).unwrap();
        assert_eq!(s.kind(), SolverKind::Direct);
        assert!(matches!(s.solve(&[1.0]), Err(SolverError::DimensionMismatch { .. })));
    }
}

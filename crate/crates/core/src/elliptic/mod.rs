//! Adapted second order operators and their M-matrix discretization.

mod eigen;
pub mod expr;
mod operator;
mod spec;

pub use eigen::{principal_eigenvalue, principal_eigenvalue_with, EigenOptions, SpectralInfo};
pub use expr::{Expr, ExprError};
pub use operator::{discretize, CoefficientFields, DiscreteOperator};
pub use spec::{Coefficient, CompiledCoefficient, CompiledOperator, NamedCoefficient, OperatorSpec, PotentialMode};

use thiserror::Error;

use crate::solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("coefficient `{name}`: {source}")]
    Expression {
        name: &'static str,
        #[source]
        source: ExprError,
    },
    #[error("coefficient `{name}` is declared radial but references x, y or d")]
    NotRadial { name: &'static str },
    #[error("adaptedness constant must be finite and >= 1, got {0}")]
    InvalidAdaptedness(f64),
    #[error("singular potential bound must be finite and > 0, got {0}")]
    InvalidSingularBound(f64),
    #[error("coefficient `{name}` is not finite at node {node} ({x}, {y})")]
    NonFinite {
        name: &'static str,
        node: usize,
        x: f64,
        y: f64,
    },
    #[error(
        "ellipticity violated at node {node} ({x}, {y}): ξᵀaξ = {value} along direction {direction} \
         outside [1/k, k] with k = {k}"
    )]
    EllipticityViolated {
        node: usize,
        x: f64,
        y: f64,
        direction: usize,
        value: f64,
        k: f64,
    },
    #[error("coefficient `{name}` = {value} at node {node} ({x}, {y}) exceeds its bound {bound}")]
    CoefficientBound {
        name: &'static str,
        node: usize,
        x: f64,
        y: f64,
        value: f64,
        bound: f64,
    },
    #[error(
        "M-matrix sign pattern violated at node {node} ({x}, {y}): off-diagonal entry {entry} > 0 \
         (|a12| = {a12} exceeds min(a11, a22) = {min_diag})"
    )]
    MMatrixViolated {
        node: usize,
        x: f64,
        y: f64,
        entry: f64,
        a12: f64,
        min_diag: f64,
    },
    #[error("shift t = {t} reaches the principal eigenvalue τ = {tau}")]
    ShiftExceedsTau { t: f64, tau: f64 },
    #[error("inverse iteration did not converge within {max_iterations} iterations (residual {residual:.3e})")]
    NoConvergence { max_iterations: usize, residual: f64 },
    #[error("principal eigenvector has a non-positive entry {value} at node {node}; the grid is likely too coarse")]
    NonPositiveEigenvector { node: usize, value: f64 },
    #[error("tolerance must be finite and > 0, got {0}")]
    InvalidTolerance(f64),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

use std::collections::HashMap;

use super::PotentialError;
use crate::elliptic::DiscreteOperator;
use crate::nodeset::NodeSet;
use crate::solver::{LinearSolver, SolverKind};
use crate::sparse::CsrMatrix;

/// A factorized Dirichlet problem on a set of interior nodes.
///
/// The discrete boundary consists of the interior nodes outside the set that
/// the stencil reaches (`outer`); ghost nodes carry zero data. One
/// factorization serves any number of boundary data.
pub struct LocalProblem {
    members: Vec<usize>,
    outer: Vec<usize>,
    coupling: CsrMatrix,
    solver: LinearSolver,
}

impl std::fmt::Debug for LocalProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LocalProblem")
            .field("members", &self.members.len())
            .field("outer", &self.outer.len())
            .finish()
    }
}

impl LocalProblem {
    pub fn new(op: &DiscreteOperator, set: &NodeSet, kind: SolverKind, tol: f64) -> Result<Self, PotentialError> {
        if set.is_empty() {
            return Err(PotentialError::EmptySet);
        }
        let a = op.matrix();
        let members = set.as_slice().to_vec();
        let mut outer_index = HashMap::new();
        let mut outer = Vec::new();
        let mut triplets = Vec::new();
        for (r, &i) in members.iter().enumerate() {
            for (j, v) in a.row(i) {
                if set.contains(j) {
                    continue;
                }
                let k = *outer_index.entry(j).or_insert_with(|| {
                    outer.push(j);
                    outer.len() - 1
                });
                triplets.push((r, k, v));
            }
        }
        let coupling = CsrMatrix::from_triplets(members.len(), outer.len(), &triplets);
        let solver = LinearSolver::new(&a.principal_submatrix(&members), kind, tol)?;
        Ok(LocalProblem {
            members,
            outer,
            coupling,
            solver,
        })
    }

    /// Interior nodes of the problem, in solve order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Boundary nodes carrying data, in data order.
    pub fn outer(&self) -> &[usize] {
        &self.outer
    }

    /// Solution on [`LocalProblem::members`] for data given on
    /// [`LocalProblem::outer`].
    pub fn solve(&self, data: &[f64]) -> Result<Vec<f64>, PotentialError> {
        super::check_len("boundary data", data.len(), self.outer.len())?;
        let rhs: Vec<f64> = self.coupling.matvec(data).into_iter().map(|v| -v).collect();
        Ok(self.solver.solve(&rhs)?)
    }

    /// Replace `u` on the member set by the solution matching `u` outside it.
    pub fn solve_from_field(&self, u: &[f64]) -> Result<Vec<f64>, PotentialError> {
        let data: Vec<f64> = self.outer.iter().map(|&j| u[j]).collect();
        let w = self.solve(&data)?;
        let mut out = u.to_vec();
        for (&i, v) in self.members.iter().zip(w) {
            out[i] = v;
        }
        Ok(out)
    }
}

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;
use serde::Serialize;

use super::GreenError;
use crate::domain::GridDomain;
use crate::elliptic::{DiscreteOperator, EllipticError};
use crate::solver::{LinearSolver, SolverKind, DEFAULT_ITERATIVE_TOL};

/// Nodes within this lattice (Chebyshev) distance of a pole are left out of
/// comparative statistics.
pub const POLE_EXCLUSION: i64 = 2;

/// Whether `node` lies in the excluded neighbourhood of `pole`.
pub fn pole_excluded(grid: &GridDomain, pole: usize, node: usize) -> bool {
    let (pi, pj) = grid.lattice_coords(pole);
    let (ni, nj) = grid.lattice_coords(node);
    (pi as i64 - ni as i64).abs().max((pj as i64 - nj as i64).abs()) <= POLE_EXCLUSION
}

/// One column `G(·, y)` (or, for adjoint columns, `G*(·, y) = G(y, ·)`).
#[derive(Debug, Clone, Serialize)]
pub struct GreenColumn {
    pub values: Vec<f64>,
    pub pole: usize,
    pub adjoint: bool,
    pub shift_t: f64,
    pub rhs_normalization: f64,
}

impl std::ops::Index<usize> for GreenColumn {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

type CacheKey = (usize, u64, bool);

/// Batched access to the discrete Green's function of one operator.
///
/// The factorization is built on first use and shared; columns are cached
/// behind a read-write lock so concurrent readers never block each other.
pub struct GreenOracle {
    op: DiscreteOperator,
    solver_kind: SolverKind,
    solver_tol: f64,
    direct_limit: usize,
    solver: OnceLock<Result<Arc<LinearSolver>, GreenError>>,
    cache: RwLock<HashMap<CacheKey, Arc<GreenColumn>>>,
}

impl std::fmt::Debug for GreenOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GreenOracle")
            .field("n", &self.op.n())
            .field("shift_t", &self.op.shift_t())
            .field("solver_kind", &self.solver_kind)
            .field("solver_tol", &self.solver_tol)
            .finish()
    }
}

impl GreenOracle {
    pub fn new(op: DiscreteOperator) -> Self {
        Self::with_solver(op, SolverKind::Auto, DEFAULT_ITERATIVE_TOL)
    }

    pub fn with_solver(op: DiscreteOperator, solver_kind: SolverKind, solver_tol: f64) -> Self {
        GreenOracle {
            op,
            solver_kind,
            solver_tol,
            direct_limit: crate::solver::AUTO_DIRECT_LIMIT,
            solver: OnceLock::new(),
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// Override the unknown count above which `Auto` switches to the
    /// iterative solver.
    pub fn with_direct_limit(mut self, limit: usize) -> Self {
        self.direct_limit = limit;
        self
    }

    /// Oracle for `L_{t+s}` with the same solver settings.
    pub fn shifted(&self, s: f64, strict: bool) -> Result<GreenOracle, GreenError> {
        let op = self.op.shift(s, strict)?;
        Ok(GreenOracle::with_solver(op, self.solver_kind, self.solver_tol).with_direct_limit(self.direct_limit))
    }

    pub fn op(&self) -> &DiscreteOperator {
        &self.op
    }

    pub fn grid(&self) -> &Arc<GridDomain> {
        self.op.grid()
    }

    pub fn h(&self) -> f64 {
        self.op.h()
    }

    pub fn solver_tol(&self) -> f64 {
        self.solver_tol
    }

    pub fn solver(&self) -> Result<Arc<LinearSolver>, GreenError> {
        self.solver
            .get_or_init(|| {
                LinearSolver::with_limit(self.op.matrix(), self.solver_kind, self.solver_tol, self.direct_limit)
                    .map(Arc::new)
                    .map_err(GreenError::from)
            })
            .clone()
    }

    pub fn solver_kind(&self) -> Result<SolverKind, GreenError> {
        Ok(self.solver()?.kind())
    }

    fn key(&self, pole: usize, adjoint: bool) -> CacheKey {
        (pole, self.op.shift_t().to_bits(), adjoint)
    }

    fn compute(&self, pole: usize, adjoint: bool) -> Result<GreenColumn, GreenError> {
        let n = self.op.n();
        if pole >= n {
            return Err(GreenError::NotInterior(pole));
        }
        let h = self.h();
        let norm = 1.0 / (h * h);
        let mut rhs = vec![0.0; n];
        rhs[pole] = norm;
        let solver = self.solver()?;
        let values = if adjoint {
            solver.solve_transpose(&rhs)?
        } else {
            solver.solve(&rhs)?
        };
        if let Some((node, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(GreenError::NonPositiveColumn { pole, node, value });
        }
        Ok(GreenColumn {
            values,
            pole,
            adjoint,
            shift_t: self.op.shift_t(),
            rhs_normalization: norm,
        })
    }

    fn cached(&self, pole: usize, adjoint: bool) -> Result<Arc<GreenColumn>, GreenError> {
        let key = self.key(pole, adjoint);
        if let Some(col) = self.cache.read().expect("cache lock poisoned").get(&key) {
            return Ok(col.clone());
        }
        let col = Arc::new(self.compute(pole, adjoint)?);
        let mut cache = self.cache.write().expect("cache lock poisoned");
        Ok(cache.entry(key).or_insert(col).clone())
    }

    /// `G(·, pole)`: solves `L_t g = e_pole / h²` with zero ghost data.
    pub fn column(&self, pole: usize) -> Result<Arc<GreenColumn>, GreenError> {
        self.cached(pole, false)
    }

    /// `G*(·, pole)`, i.e. the row `G(pole, ·)`.
    pub fn adjoint_column(&self, pole: usize) -> Result<Arc<GreenColumn>, GreenError> {
        self.cached(pole, true)
    }

    /// Solve a batch of columns in parallel.
    pub fn columns(&self, poles: &[usize], adjoint: bool) -> Result<Vec<Arc<GreenColumn>>, GreenError> {
        self.solver()?;
        poles.par_iter().map(|&p| self.cached(p, adjoint)).collect()
    }

    /// Compute a column without storing it.
    pub fn column_uncached(&self, pole: usize, adjoint: bool) -> Result<GreenColumn, GreenError> {
        self.compute(pole, adjoint)
    }

    pub fn clear_cache(&self) {
        self.cache.write().expect("cache lock poisoned").clear();
    }

    pub fn cached_columns(&self) -> usize {
        self.cache.read().expect("cache lock poisoned").len()
    }

    /// `G(x, y)`.
    pub fn value(&self, x: usize, y: usize) -> Result<f64, GreenError> {
        Ok(self.column(y)?.values[x])
    }

    /// Dirichlet solve reusing the oracle's factorization.
    pub fn solve_dirichlet(&self, boundary_data: &[f64], rhs: &[f64]) -> Result<Vec<f64>, GreenError> {
        let solver = self.solver()?;
        dirichlet_with(&self.op, &solver, boundary_data, rhs)
    }
}

fn dirichlet_with(
    op: &DiscreteOperator,
    solver: &LinearSolver,
    boundary_data: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, GreenError> {
    let n = op.n();
    let ng = op.grid().ghost_count();
    if boundary_data.len() != ng {
        return Err(GreenError::DimensionMismatch {
            what: "boundary data",
            got: boundary_data.len(),
            expected: ng,
        });
    }
    if rhs.len() != n {
        return Err(GreenError::DimensionMismatch {
            what: "right-hand side",
            got: rhs.len(),
            expected: n,
        });
    }
    if let Some(i) = boundary_data.iter().position(|v| !v.is_finite()) {
        return Err(GreenError::Elliptic(EllipticError::NonFinite {
            name: "boundary_data",
            node: i,
            x: op.grid().ghost_point(i).x,
            y: op.grid().ghost_point(i).y,
        }));
    }
    let coupling = op.boundary_coupling().matvec(boundary_data);
    let b: Vec<f64> = rhs.iter().zip(coupling).map(|(r, c)| r - c).collect();
    Ok(solver.solve(&b)?)
}

/// Solve `L_t u = rhs` in the interior with `u = boundary_data` on the ghost
/// layer.
pub fn solve_dirichlet(
    op: &DiscreteOperator,
    boundary_data: &[f64],
    rhs: &[f64],
    solver_kind: SolverKind,
    tol: f64,
) -> Result<Vec<f64>, GreenError> {
    let solver = LinearSolver::new(op.matrix(), solver_kind, tol)?;
    dirichlet_with(op, &solver, boundary_data, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{rasterize, DomainSpec};
    use crate::elliptic::{discretize, OperatorSpec};
    use crate::geometry::Point;
    use crate::green::disk_green;

    fn disk_oracle(h: f64, spec: &OperatorSpec) -> GreenOracle {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, h).unwrap());
        GreenOracle::new(discretize(spec, &g).unwrap())
    }

    #[test]
    fn harmonic_data_is_reproduced() {
        let g = Arc::new(rasterize(&DomainSpec::Square { side: 1.0 }, 1.0 / 32.0).unwrap());
        let op = discretize(&OperatorSpec::laplacian(), &g).unwrap();
        let zero = vec![0.0; op.n()];
        let ones = solve_dirichlet(&op, &vec![1.0; g.ghost_count()], &zero, SolverKind::Direct, 1e-12).unwrap();
        assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-10));
        let data: Vec<f64> = (0..g.ghost_count()).map(|k| g.ghost_point(k).x).collect();
        let u = solve_dirichlet(&op, &data, &zero, SolverKind::Iterative, 1e-12).unwrap();
        for (p, v) in g.points().zip(u) {
            assert!((v - p.x).abs() < 1e-10);
        }
    }

    #[test]
    fn semicircle_indicator_gives_one_half() {
        let oracle = disk_oracle(1.0 / 64.0, &OperatorSpec::laplacian());
        let g = oracle.grid().clone();
        let data: Vec<f64> = (0..g.ghost_count())
            .map(|k| if g.ghost_point(k).y > 0.0 { 1.0 } else { 0.0 })
            .collect();
        let u = oracle.solve_dirichlet(&data, &vec![0.0; g.interior_count()]).unwrap();
        let v = u[g.node_at(Point::ORIGIN).unwrap()];
        assert!((v - 0.5).abs() < 0.02, "{v}");
    }

    #[test]
    fn disk_green_oracle_coarse() {
        // the 2% target at h = 1/128 is exercised by the acceptance suite
        let oracle = disk_oracle(1.0 / 64.0, &OperatorSpec::laplacian());
        let g = oracle.grid().clone();
        let y = g.node_at(Point::new(0.3, 0.0)).unwrap();
        let col = oracle.column(y).unwrap();
        let mut worst = 0.0f64;
        for (x, p) in g.points().enumerate() {
            // node-sampled boundaries cost O(h/đ) relative accuracy, so
            // probes stay at distance 0.2 from the circle
            if p.dist(g.point(y)) > 0.1 && p.norm() < 0.8 {
                let exact = disk_green(p, g.point(y));
                worst = worst.max((col[x] - exact).abs() / exact);
            }
        }
        assert!(worst < 0.035, "{worst}");
    }

    #[test]
    fn symmetry_and_duality() {
        let oracle = disk_oracle(1.0 / 32.0, &OperatorSpec::laplacian());
        let (a, b) = (17, 402);
        let gab = oracle.value(a, b).unwrap();
        let gba = oracle.value(b, a).unwrap();
        assert!((gab - gba).abs() < 1e-12 * gab);

        let spec = OperatorSpec::laplacian().with_drift("0.6*y", "0.3").with_k(1.0);
        let oracle = disk_oracle(1.0 / 32.0, &spec);
        let fwd = oracle.column(b).unwrap();
        let adj = oracle.adjoint_column(a).unwrap();
        assert!((fwd[a] - adj[b]).abs() < 1e-12 * fwd[a]);
        assert!(fwd.values.iter().all(|&v| v > 0.0));
        assert_eq!(oracle.cached_columns(), 2);
    }

    #[test]
    fn subdomain_green_is_smaller() {
        let h = 1.0 / 32.0;
        let big = disk_oracle(h, &OperatorSpec::laplacian());
        let sg = Arc::new(rasterize(&DomainSpec::Square { side: 1.2 }, h).unwrap());
        let small = GreenOracle::new(discretize(&OperatorSpec::laplacian(), &sg).unwrap());
        let ps = sg.node_at(Point::new(0.25, 0.125)).unwrap();
        let pb = big.grid().node_at(sg.point(ps)).unwrap();
        let (cs, cb) = (small.column(ps).unwrap(), big.column(pb).unwrap());
        for (n, p) in sg.points().enumerate() {
            let m = big.grid().node_at(p).unwrap();
            assert!(cs[n] <= cb[m]);
        }
    }

    #[test]
    fn errors() {
        let oracle = disk_oracle(1.0 / 16.0, &OperatorSpec::laplacian());
        assert!(matches!(oracle.column(1 << 30), Err(GreenError::NotInterior(_))));
        let n = oracle.op().n();
        assert!(matches!(
            oracle.solve_dirichlet(&[1.0], &vec![0.0; n]),
            Err(GreenError::DimensionMismatch { .. })
        ));
        let beyond = oracle.shifted(40.0, false).unwrap();
        assert!(matches!(beyond.column(0), Err(GreenError::NonPositiveColumn { .. })));
    }
}

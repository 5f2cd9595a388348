use std::sync::Arc;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use super::expr::Vars;
use super::spec::{CompiledOperator, PotentialMode};
use super::{EllipticError, OperatorSpec, SpectralInfo};
use crate::domain::{distance_to_boundary, GridDomain, Neighbor};
use crate::sparse::CsrMatrix;

/// Coefficients sampled at the interior nodes.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientFields {
    pub a11: Vec<f64>,
    pub a12: Vec<f64>,
    pub a22: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub c: Vec<f64>,
}

/// The discretized operator `L_t = L - t·id` on the interior nodes of a grid.
///
/// `matrix` acts on interior values; `boundary` couples interior rows to the
/// ghost layer, so that `L u = matrix·u + boundary·g` for ghost data `g`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Arc<GridDomain>,
    spec: OperatorSpec,
    coefficients: Arc<CoefficientFields>,
    base: Arc<CsrMatrix>,
    boundary: Arc<CsrMatrix>,
    matrix: Arc<CsrMatrix>,
    shift_t: f64,
    spectral: Option<SpectralInfo>,
}

const DIRECTIONS: usize = 8;

fn sample(compiled: &CompiledOperator, grid: &GridDomain) -> Result<CoefficientFields, EllipticError> {
    let dist = compiled.needs_distance().then(|| distance_to_boundary(grid));
    let n = grid.interior_count();
    let vars = |i: usize| {
        let p = grid.point(i);
        Vars {
            x: p.x,
            y: p.y,
            d: dist.as_ref().map_or(f64::NAN, |d| d[i]),
        }
    };
    let mut fields: [Vec<f64>; 6] = Default::default();
    for (slot, (name, coef)) in fields.iter_mut().zip(compiled.named()) {
        *slot = match coef.as_constant() {
            Some(c) => vec![c; n],
            None => (0..n).into_par_iter().map(|i| coef.eval(&vars(i))).collect(),
        };
        if let Some(i) = slot.iter().position(|v| !v.is_finite()) {
            let p = grid.point(i);
            return Err(EllipticError::NonFinite {
                name,
                node: i,
                x: p.x,
                y: p.y,
            });
        }
    }
    let [a11, a12, a22, b1, b2, c] = fields;
    let fields = CoefficientFields {
        a11,
        a12,
        a22,
        b1,
        b2,
        c,
    };
    check_bounds(compiled, grid, &fields, dist.as_ref().map(|d| &d.values[..]))?;
    Ok(fields)
}

fn check_bounds(
    compiled: &CompiledOperator,
    grid: &GridDomain,
    f: &CoefficientFields,
    dist: Option<&[f64]>,
) -> Result<(), EllipticError> {
    let k = compiled.k;
    let tol = 1e-12 * k;
    for i in 0..grid.interior_count() {
        let p = grid.point(i);
        for dir in 0..DIRECTIONS {
            let phi = std::f64::consts::PI * dir as f64 / 4.0;
            let (s, c) = phi.sin_cos();
            let q = f.a11[i] * c * c + 2.0 * f.a12[i] * c * s + f.a22[i] * s * s;
            if q < 1.0 / k - tol || q > k + tol {
                return Err(EllipticError::EllipticityViolated {
                    node: i,
                    x: p.x,
                    y: p.y,
                    direction: dir,
                    value: q,
                    k,
                });
            }
        }
        let mut checks = vec![
            ("a11", f.a11[i].abs(), k),
            ("a12", f.a12[i].abs(), k),
            ("a22", f.a22[i].abs(), k),
            ("b1", f.b1[i].abs(), k),
            ("b2", f.b2[i].abs(), k),
        ];
        match compiled.mode {
            PotentialMode::Strict => checks.push(("c", f.c[i].abs(), k)),
            PotentialMode::Singular { a_bound } => {
                let d = dist.expect("distance is sampled in singular mode")[i];
                checks.push(("c", f.c[i], a_bound / (d * d)));
                checks.push(("c", -f.c[i], k));
            }
        }
        for (name, value, bound) in checks {
            if value > bound + tol {
                return Err(EllipticError::CoefficientBound {
                    name,
                    node: i,
                    x: p.x,
                    y: p.y,
                    value,
                    bound,
                });
            }
        }
    }
    Ok(())
}

/// Assemble the upwinded finite-difference matrix of `spec` on `grid`.
///
/// Second derivatives use central differences. The mixed derivative uses the
/// seven-point stencil whose diagonal pair is aligned with the sign of `a12`
/// (corners `(+,+)`/`(-,-)` for `a12 > 0`), which keeps every off-diagonal
/// entry non-positive as long as `|a12| ≤ min(a11, a22)`. First order terms
/// are upwinded.
pub fn discretize(spec: &OperatorSpec, grid: &Arc<GridDomain>) -> Result<DiscreteOperator, EllipticError> {
    let compiled = spec.compile()?;
    let fields = sample(&compiled, grid)?;
    let h = grid.h();
    let inv_h2 = 1.0 / (h * h);
    let n = grid.interior_count();

    let mut interior = Vec::with_capacity(9 * n);
    let mut ghost = Vec::new();
    for i in 0..n {
        let (a11, a12, a22) = (fields.a11[i], fields.a12[i], fields.a22[i]);
        let (b1, b2) = (fields.b1[i], fields.b2[i]);
        let m = a12.abs();
        let corner = if a12 >= 0.0 {
            [(1, 1), (-1, -1)]
        } else {
            [(1, -1), (-1, 1)]
        };
        let mut stencil: [(i64, i64, f64); 8] = [
            (1, 0, (-a11 + m) * inv_h2 - b1.min(0.0).abs() / h),
            (-1, 0, (-a11 + m) * inv_h2 - b1.max(0.0) / h),
            (0, 1, (-a22 + m) * inv_h2 - b2.min(0.0).abs() / h),
            (0, -1, (-a22 + m) * inv_h2 - b2.max(0.0) / h),
            (corner[0].0, corner[0].1, -m * inv_h2),
            (corner[1].0, corner[1].1, -m * inv_h2),
            (0, 0, 0.0),
            (0, 0, 0.0),
        ];
        for e in stencil.iter_mut().take(6) {
            if e.2 > 0.0 {
                let p = grid.point(i);
                return Err(EllipticError::MMatrixViolated {
                    node: i,
                    x: p.x,
                    y: p.y,
                    entry: e.2,
                    a12,
                    min_diag: a11.min(a22),
                });
            }
        }
        let diag = (2.0 * a11 + 2.0 * a22 - 2.0 * m) * inv_h2 + (b1.abs() + b2.abs()) / h + fields.c[i];
        interior.push((i, i, diag));
        for &(di, dj, v) in stencil.iter().take(6) {
            if v == 0.0 {
                continue;
            }
            match grid.neighbor(i, di, dj) {
                Neighbor::Interior(j) => interior.push((i, j, v)),
                Neighbor::Ghost(g) => ghost.push((i, g, v)),
                Neighbor::Outside => unreachable!("ghost layer covers the 9-point stencil"),
            }
        }
    }
    let base = Arc::new(CsrMatrix::from_triplets(n, n, &interior));
    let boundary = Arc::new(CsrMatrix::from_triplets(n, grid.ghost_count(), &ghost));
    Ok(DiscreteOperator {
        grid: grid.clone(),
        spec: spec.clone(),
        coefficients: Arc::new(fields),
        matrix: base.clone(),
        base,
        boundary,
        shift_t: 0.0,
        spectral: None,
    })
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Arc<GridDomain> {
        &self.grid
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    /// Number of unknowns (interior nodes).
    pub fn n(&self) -> usize {
        self.base.n_rows()
    }

    /// `L_t` restricted to interior nodes.
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Coupling of interior rows to ghost-layer values.
    pub fn boundary_coupling(&self) -> &CsrMatrix {
        &self.boundary
    }

    pub fn coefficients(&self) -> &CoefficientFields {
        &self.coefficients
    }

    pub fn shift_t(&self) -> f64 {
        self.shift_t
    }

    pub fn spectral(&self) -> Option<&SpectralInfo> {
        self.spectral.as_ref()
    }

    /// Attach the spectral data of the current matrix.
    pub fn with_spectral(mut self, info: SpectralInfo) -> Self {
        self.spectral = Some(info);
        self
    }

    /// `L_t u` for interior values `u` and ghost values `g`.
    pub fn apply(&self, u: &[f64], ghost: &[f64]) -> Vec<f64> {
        let mut out = self.matrix.matvec(u);
        for (o, b) in out.iter_mut().zip(self.boundary.matvec(ghost)) {
            *o += b;
        }
        out
    }

    /// `L_{t+s}`. The base matrix is kept, so shifting back recovers the
    /// original matrix bit for bit.
    ///
    /// When spectral data is attached, `s` must stay below the remaining
    /// principal eigenvalue: with `strict` this is an error, otherwise a
    /// warning.
    pub fn shift(&self, s: f64, strict: bool) -> Result<DiscreteOperator, EllipticError> {
        let spectral = match &self.spectral {
            Some(info) => {
                if s >= info.tau_estimate {
                    if strict {
                        return Err(EllipticError::ShiftExceedsTau {
                            t: s,
                            tau: info.tau_estimate,
                        });
                    }
                    warn!(
                        "shift {s} reaches the principal eigenvalue {}; the shifted operator has no Green's function",
                        info.tau_estimate
                    );
                }
                Some(info.shifted(s))
            }
            None => None,
        };
        let shift_t = self.shift_t + s;
        let matrix = if shift_t == 0.0 {
            self.base.clone()
        } else {
            Arc::new(self.base.add_identity(-shift_t))
        };
        Ok(DiscreteOperator {
            matrix,
            shift_t,
            spectral,
            ..self.clone()
        })
    }

    /// Whether every stored off-diagonal entry (interior and ghost coupling)
    /// is non-positive and every diagonal entry positive.
    pub fn has_m_matrix_pattern(&self) -> bool {
        self.matrix
            .entries()
            .all(|(r, c, v)| if r == c { v > 0.0 } else { v <= 0.0 })
            && self.boundary.entries().all(|(_, _, v)| v <= 0.0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrix.entries().all(|(r, c, v)| self.matrix.get(c, r) == v)
    }

    pub fn transpose_matrix(&self) -> CsrMatrix {
        self.matrix.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{rasterize, DomainSpec};
    use crate::elliptic::Coefficient;

    fn square(h: f64) -> Arc<GridDomain> {
        Arc::new(rasterize(&DomainSpec::Square { side: 1.0 }, h).unwrap())
    }

    #[test]
    fn five_point_laplacian() {
        let g = square(1.0 / 16.0);
        let op = discretize(&OperatorSpec::laplacian(), &g).unwrap();
        let h2 = 1.0 / 256.0;
        let center = g.node_at(crate::Point::ORIGIN).unwrap();
        let row: Vec<_> = op.matrix().row(center).collect();
        assert_eq!(row.len(), 5);
        for (c, v) in row {
            if c == center {
                assert_eq!(v, 4.0 / h2);
            } else {
                assert_eq!(v, -1.0 / h2);
            }
        }
        let op1 = discretize(&OperatorSpec::laplacian_plus(1.0), &g).unwrap();
        assert_eq!(op1.matrix().get(center, center), 4.0 / h2 + 1.0);
        assert!(op.is_symmetric() && op.has_m_matrix_pattern());
    }

    #[test]
    fn quadratics_are_exact() {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, 1.0 / 32.0).unwrap());
        let u: Vec<f64> = g.points().map(|p| p.norm_sq()).collect();
        let ghost: Vec<f64> = (0..g.ghost_count()).map(|k| g.ghost_point(k).norm_sq()).collect();
        let op = discretize(&OperatorSpec::laplacian(), &g).unwrap();
        for v in op.apply(&u, &ghost) {
            assert!((v + 4.0).abs() < 1e-9, "{v}");
        }
        // mixed term: L = -(Δ + 2·0.5 ∂xy), u = xy → L u = -1
        let mut spec = OperatorSpec::laplacian().with_k(2.0);
        spec.a12 = Coefficient::Constant(0.5);
        let op = discretize(&spec, &g).unwrap();
        let u: Vec<f64> = g.points().map(|p| p.x * p.y).collect();
        let ghost: Vec<f64> = (0..g.ghost_count())
            .map(|k| g.ghost_point(k))
            .map(|p| p.x * p.y)
            .collect();
        for v in op.apply(&u, &ghost) {
            assert!((v + 1.0).abs() < 1e-9, "{v}");
        }
        spec.a12 = Coefficient::Constant(-0.5);
        let op = discretize(&spec, &g).unwrap();
        for v in op.apply(&u, &ghost) {
            assert!((v - 1.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn first_order_consistency() {
        // u = sin(x) cos(y) with drift and potential; error must shrink ~ h
        let spec = OperatorSpec {
            a11: "1 + 0.5 * x^2".into(),
            a12: "0.2 * y".into(),
            b1: "x - 0.3".into(),
            b2: 0.7.into(),
            c: "1 + x*y".into(),
            adaptedness_k: 2.0,
            ..OperatorSpec::laplacian()
        };
        let exact = |x: f64, y: f64| {
            let (ux, uy) = (x.cos() * y.cos(), -x.sin() * y.sin());
            let (uxx, uyy, uxy) = (-x.sin() * y.cos(), -x.sin() * y.cos(), -x.cos() * y.sin());
            -(1.0 + 0.5 * x * x) * uxx - 2.0 * 0.2 * y * uxy - uyy
                + (x - 0.3) * ux
                + 0.7 * uy
                + (1.0 + x * y) * x.sin() * y.cos()
        };
        let mut errs = Vec::new();
        for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
            let g = square(h);
            let op = discretize(&spec, &g).unwrap();
            let f = |p: crate::Point| p.x.sin() * p.y.cos();
            let u: Vec<f64> = g.points().map(f).collect();
            let gh: Vec<f64> = (0..g.ghost_count()).map(|k| f(g.ghost_point(k))).collect();
            let lu = op.apply(&u, &gh);
            let err = g
                .points()
                .zip(lu)
                .map(|(p, v)| (v - exact(p.x, p.y)).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[1] < 0.6 * errs[0] && errs[2] < 0.6 * errs[1], "{errs:?}");
    }

    #[test]
    fn violations_are_reported() {
        let g = square(1.0 / 16.0);
        let mut spec = OperatorSpec::laplacian().with_k(4.0);
        spec.a11 = 2.0.into();
        spec.a12 = 1.2.into();
        assert!(matches!(
            discretize(&spec, &g),
            Err(EllipticError::MMatrixViolated { .. })
        ));
        spec.a12 = 1.5.into();
        assert!(matches!(
            discretize(&spec, &g),
            Err(EllipticError::EllipticityViolated { .. })
        ));
        let spec = OperatorSpec::laplacian().with_drift(2.0, 0.0);
        assert!(matches!(
            discretize(&spec, &g),
            Err(EllipticError::CoefficientBound { name: "b1", .. })
        ));
        let mut spec = OperatorSpec::laplacian();
        spec.c = "log(x)".into();
        assert!(matches!(
            discretize(&spec, &g),
            Err(EllipticError::NonFinite { name: "c", .. })
        ));
    }

    #[test]
    fn singular_mode_bounds_against_distance() {
        let g = square(1.0 / 16.0);
        let mut spec = OperatorSpec::laplacian();
        spec.c = "0.2 / d^2".into();
        assert!(matches!(
            discretize(&spec, &g),
            Err(EllipticError::CoefficientBound { name: "c", .. })
        ));
        spec.mode = PotentialMode::Singular { a_bound: 0.25 };
        let op = discretize(&spec, &g).unwrap();
        assert!(op.has_m_matrix_pattern());
    }

    #[test]
    fn shift_group_property() {
        let g = square(1.0 / 16.0);
        let op = discretize(&OperatorSpec::laplacian(), &g).unwrap();
        assert_eq!(op.shift(0.0, true).unwrap().matrix(), op.matrix());
        let s = op.shift(1.0, true).unwrap();
        let c = g.node_at(crate::Point::ORIGIN).unwrap();
        assert_eq!(s.matrix().get(c, c), 4.0 * 256.0 - 1.0);
        let theta = 9.869_604_401_089_358;
        let back = op.shift(theta, true).unwrap().shift(-theta, true).unwrap();
        assert_eq!(back.matrix(), op.matrix());
        assert_eq!(back.shift_t(), 0.0);
    }
}

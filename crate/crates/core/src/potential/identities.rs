use serde::Serialize;

use super::{reduit_adjoint, reduit_with, PotentialError, ReduitOptions};
use crate::green::GreenOracle;
use crate::nodeset::NodeSet;

/// Defects of the algebraic reduit identities on one instance, each relative
/// to the size of the quantities involved.
#[derive(Debug, Clone, Serialize)]
pub struct ReduitIdentities {
    /// `|R_{λu} − λ R_u|∞ / (λ |R_u|∞)`.
    pub scaling: f64,
    /// `|R_{u+v} − R_u − R_v|∞ / |R_{u+v}|∞`; exact for superharmonic `u, v`.
    pub additivity: f64,
    /// `max (R_u^{A∪B} − R_u^A − R_u^B)⁺ / |R_u^{A∪B}|∞`.
    pub subadditivity: f64,
    /// `max_{i ∉ A} |(M R_u^A)_i| / (m_ii |R_u^A|∞)`.
    pub harmonic_off_set: f64,
    /// `|R_{G(·,y)}^A(x) − R*_{G(x,·)}^A(y)|`, relative to the larger side.
    pub duality: f64,
    pub sweeps: usize,
}

impl ReduitIdentities {
    pub fn worst(&self) -> f64 {
        [
            self.scaling,
            self.additivity,
            self.subadditivity,
            self.harmonic_off_set,
            self.duality,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Measure every reduit identity with `u = G(·, poles.0)`,
/// `v = G(·, poles.1)` and the duality pair `(x, poles.0)`.
pub fn reduit_identities(
    oracle: &GreenOracle,
    a: &NodeSet,
    b: &NodeSet,
    poles: (usize, usize),
    x: usize,
    lambda: f64,
    opts: &ReduitOptions,
) -> Result<ReduitIdentities, PotentialError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(PotentialError::InvalidParameter {
            name: "lambda",
            reason: format!("must be positive and finite, got {lambda}"),
        });
    }
    let op = oracle.op();
    let (y, z) = poles;
    let u = oracle.column(y)?.values.clone();
    let v = oracle.column(z)?.values.clone();
    let star = oracle.adjoint_column(x)?.values.clone();
    let scaled: Vec<f64> = u.iter().map(|t| lambda * t).collect();
    let sum: Vec<f64> = u.iter().zip(&v).map(|(s, t)| s + t).collect();
    let both = a.union(b);

    let mut sweeps = 0;
    let mut run = |f: &[f64], set: &NodeSet, adjoint: bool| -> Result<Vec<f64>, PotentialError> {
        let r = if adjoint {
            reduit_adjoint(op, f, set, opts)?
        } else {
            reduit_with(op, f, set, opts)?
        };
        sweeps += r.iterations;
        Ok(r.values)
    };
    let ru = run(&u, a, false)?;
    let rv = run(&v, a, false)?;
    let rsum = run(&sum, a, false)?;
    let rscaled = run(&scaled, a, false)?;
    let rub = run(&u, b, false)?;
    let runion = run(&u, &both, false)?;
    let rstar = run(&star, a, true)?;

    let scaling = ru
        .iter()
        .zip(&rscaled)
        .map(|(r, s)| (s - lambda * r).abs())
        .fold(0.0, f64::max)
        / (lambda * sup(&ru));
    let additivity = (0..ru.len())
        .map(|i| (rsum[i] - ru[i] - rv[i]).abs())
        .fold(0.0, f64::max)
        / sup(&rsum);
    let subadditivity = (0..ru.len())
        .map(|i| (runion[i] - ru[i] - rub[i]).max(0.0))
        .fold(0.0, f64::max)
        / sup(&runion);
    let m = op.matrix();
    let mv = m.matvec(&ru);
    let diag = m.diagonal();
    let harmonic_off_set = (0..ru.len())
        .filter(|&i| !a.contains(i))
        .map(|i| (mv[i] / diag[i]).abs())
        .fold(0.0, f64::max)
        / sup(&ru);
    let (lhs, rhs) = (ru[x], rstar[y]);
    let duality = (lhs - rhs).abs() / lhs.abs().max(rhs.abs());
    Ok(ReduitIdentities {
        scaling,
        additivity,
        subadditivity,
        harmonic_off_set,
        duality,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domain::{rasterize, DomainSpec};
    use crate::elliptic::{discretize, OperatorSpec};
    use crate::geometry::Point;

    #[test]
    fn identities_hold_with_drift() {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, 1.0 / 16.0).unwrap());
        let spec = OperatorSpec::laplacian_plus(0.5).with_drift(0.4, -0.2);
        let o = GreenOracle::new(discretize(&spec, &g).unwrap());
        let a = NodeSet::ball(&g, Point::new(0.2, 0.1), 0.3);
        let b = NodeSet::ball(&g, Point::new(-0.3, -0.2), 0.25);
        let at = |x, y| g.node_at(Point::new(x, y)).unwrap();
        let opts = ReduitOptions {
            tol: 1e-12,
            ..Default::default()
        };
        let r = reduit_identities(&o, &a, &b, (at(0.25, 0.125), at(-0.5, 0.25)), at(0.5, -0.5), 3.0, &opts).unwrap();
        assert!(r.worst() < 1e-8, "{r:?}");
        assert!(matches!(
            reduit_identities(&o, &a, &b, (0, 1), 2, 0.0, &opts),
            Err(PotentialError::InvalidParameter { name: "lambda", .. })
        ));
    }
}

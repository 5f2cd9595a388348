use std::collections::BTreeSet;

use serde::Serialize;

use super::{linear_fit, PotentialError};
use crate::green::{pole_excluded, GreenOracle};
use crate::metric::MetricGraph;

/// How distances between probe points are measured.
#[derive(Debug, Clone, Copy)]
pub enum DecayMetric<'a> {
    Euclidean,
    QuasiHyperbolic(&'a MetricGraph),
}

#[derive(Debug, Clone, Serialize)]
pub struct DecaySample {
    pub x: usize,
    pub y: usize,
    pub d: f64,
    /// `G(x, y) G(y, x)`.
    pub product: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    /// `"euclidean"` or `"quasi_hyperbolic"`.
    pub mode: &'static str,
    pub prefactor_power: f64,
    pub samples: Vec<DecaySample>,
    /// Fitted rate from `ln(product · d^p) ≈ ln B − α₂ d`.
    pub alpha2: f64,
    /// Smallest `B` with `product ≤ B e^{−α₂ d}` on every sample.
    pub b: f64,
    /// Smallest `B` with `product ≤ B d^{−p} e^{−α₂ d}` on every sample.
    pub b_prefactor: f64,
    pub residual: f64,
}

/// Fit the exponential envelope of `G(x, y) G(y, x)` against distance.
///
/// The regression is run on `ln(product) + p ln d`; `p = 0` is the plain
/// exponential model and `p = 1` removes the `1/√d` Bessel prefactors of the
/// two factors. The envelope constants are then raised so every sample lies
/// under them. For symmetric operators the product is `G(x, y)²`, using a
/// single column per pole; otherwise adjoint columns supply `G(x, y)`.
pub fn decay_fit(
    oracle: &GreenOracle,
    pairs: &[(usize, usize)],
    metric: DecayMetric<'_>,
    prefactor_power: f64,
) -> Result<DecayFit, PotentialError> {
    if pairs.len() < 2 {
        return Err(PotentialError::InvalidParameter {
            name: "pairs",
            reason: format!("need at least two pairs, got {}", pairs.len()),
        });
    }
    let grid = oracle.grid();
    for &(x, y) in pairs {
        if x == y || pole_excluded(grid, x, y) {
            return Err(PotentialError::PairTooClose { x, y });
        }
    }
    let dist = |x: usize, y: usize| match metric {
        DecayMetric::Euclidean => grid.point(x).dist(grid.point(y)),
        DecayMetric::QuasiHyperbolic(g) => g.distance(x, y),
    };
    let ds: Vec<f64> = pairs.iter().map(|&(x, y)| dist(x, y)).collect();
    let dmin = ds.iter().copied().fold(f64::INFINITY, f64::min);
    let dmax = ds.iter().copied().fold(0.0, f64::max);
    if dmax < 3.0 * dmin {
        return Err(PotentialError::InsufficientSpread { min: dmin, max: dmax });
    }

    let poles: Vec<usize> = pairs.iter().map(|p| p.0).collect::<BTreeSet<_>>().into_iter().collect();
    let forward = oracle.columns(&poles, false)?;
    let symmetric = oracle.op().is_symmetric();
    let adjoint = if symmetric {
        None
    } else {
        Some(oracle.columns(&poles, true)?)
    };
    let samples: Vec<DecaySample> = pairs
        .iter()
        .zip(&ds)
        .map(|(&(x, y), &d)| {
            let k = poles.binary_search(&x).unwrap();
            let g_yx = forward[k][y];
            let product = match &adjoint {
                None => g_yx * g_yx,
                Some(adj) => adj[k][y] * g_yx,
            };
            DecaySample { x, y, d, product }
        })
        .collect();
    if let Some(s) = samples.iter().find(|s| !(s.product > 0.0)) {
        return Err(PotentialError::NonPositiveFunction {
            which: "Green product",
            node: s.y,
            value: s.product,
        });
    }

    let logs: Vec<f64> = samples
        .iter()
        .map(|s| s.product.ln() + prefactor_power * s.d.ln())
        .collect();
    let (_, slope, residual) = linear_fit(&ds, &logs);
    let alpha2 = -slope;
    let b = samples
        .iter()
        .map(|s| s.product * (alpha2 * s.d).exp())
        .fold(0.0, f64::max);
    let b_prefactor = samples
        .iter()
        .map(|s| s.product * s.d.powf(prefactor_power) * (alpha2 * s.d).exp())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        mode: match metric {
            DecayMetric::Euclidean => "euclidean",
            DecayMetric::QuasiHyperbolic(_) => "quasi_hyperbolic",
        },
        prefactor_power,
        samples,
        alpha2,
        b,
        b_prefactor,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domain::{rasterize, DomainSpec};
    use crate::elliptic::{discretize, OperatorSpec};
    use crate::geometry::Point;

    fn pairs(o: &GreenOracle, from: Point, ds: &[f64]) -> Vec<(usize, usize)> {
        let g = o.grid();
        let x = g.node_at(from).unwrap();
        ds.iter()
            .map(|&d| (x, g.node_at(from + Point::new(d, 0.0)).unwrap()))
            .collect()
    }

    #[test]
    fn envelope_dominates_every_sample() {
        let g = Arc::new(rasterize(&DomainSpec::Square { side: 4.0 }, 1.0 / 16.0).unwrap());
        let o = GreenOracle::new(discretize(&OperatorSpec::laplacian_plus(1.0), &g).unwrap());
        let ps = pairs(&o, Point::new(-1.0, 0.0), &[0.5, 0.75, 1.0, 1.25, 1.5, 1.75]);
        let fit = decay_fit(&o, &ps, DecayMetric::Euclidean, 0.0).unwrap();
        assert!(fit.alpha2 > 0.0);
        for s in &fit.samples {
            assert!(s.product <= fit.b * (-fit.alpha2 * s.d).exp() * (1.0 + 1e-12));
        }
        let col = o.column(ps[0].0).unwrap();
        assert_eq!(fit.samples[2].product, col[ps[2].1] * col[ps[2].1]);
    }

    #[test]
    fn drift_uses_adjoint_columns() {
        let g = Arc::new(rasterize(&DomainSpec::Square { side: 4.0 }, 1.0 / 16.0).unwrap());
        let spec = OperatorSpec::laplacian_plus(1.0).with_drift(0.5, 0.0);
        let o = GreenOracle::new(discretize(&spec, &g).unwrap());
        let ps = pairs(&o, Point::new(-1.0, 0.0), &[0.5, 1.0, 1.5]);
        let fit = decay_fit(&o, &ps, DecayMetric::Euclidean, 0.0).unwrap();
        let (x, y) = ps[1];
        let expected = o.value(x, y).unwrap() * o.value(y, x).unwrap();
        assert!((fit.samples[1].product - expected).abs() <= 1e-10 * expected);
    }

    #[test]
    fn spread_and_clearance_are_checked() {
        let g = Arc::new(rasterize(&DomainSpec::Square { side: 4.0 }, 0.125).unwrap());
        let o = GreenOracle::new(discretize(&OperatorSpec::laplacian_plus(1.0), &g).unwrap());
        let ps = pairs(&o, Point::new(-1.0, 0.0), &[1.0, 1.5]);
        assert!(matches!(
            decay_fit(&o, &ps, DecayMetric::Euclidean, 0.0),
            Err(PotentialError::InsufficientSpread { .. })
        ));
        let ps = pairs(&o, Point::new(-1.0, 0.0), &[0.125, 1.0]);
        assert!(matches!(
            decay_fit(&o, &ps, DecayMetric::Euclidean, 0.0),
            Err(PotentialError::PairTooClose { .. })
        ));
    }
}

use serde::Serialize;

use super::PotentialError;
use crate::geometry::Point;
use crate::green::GreenOracle;

/// Normalized Green quotients `K_i = G(·, p_i) / G(p, p_i)` along a pole
/// sequence.
#[derive(Debug, Clone, Serialize)]
pub struct MartinSequence {
    pub basepoint: usize,
    pub poles: Vec<usize>,
    /// Distance to the boundary of each pole.
    pub pole_distances: Vec<f64>,
    pub probes: Vec<usize>,
    /// Full kernel fields, one per pole.
    #[serde(skip)]
    pub kernels: Vec<Vec<f64>>,
    /// `kernels[i]` restricted to the probes.
    pub probe_values: Vec<Vec<f64>>,
    /// `max over probes |K_{i+1} − K_i|` for successive poles.
    pub successive_sup: Vec<f64>,
}

impl MartinSequence {
    /// Relative sup distance on the probes between each kernel and `target`.
    pub fn sup_relative_error(&self, target: impl Fn(usize) -> f64) -> Vec<f64> {
        let t: Vec<f64> = self.probes.iter().map(|&x| target(x)).collect();
        self.probe_values
            .iter()
            .map(|k| {
                k.iter()
                    .zip(&t)
                    .map(|(a, b)| (a - b).abs() / b.abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// Martin kernels for poles approaching the boundary.
///
/// Each pole costs one column solve of the shared factorization. Poles
/// closer than `4h` to the boundary are rejected.
pub fn martin_sequence(
    oracle: &GreenOracle,
    p: usize,
    poles: &[usize],
    probes: &[usize],
) -> Result<MartinSequence, PotentialError> {
    let grid = oracle.grid();
    let n = grid.interior_count();
    if poles.is_empty() {
        return Err(PotentialError::EmptySet);
    }
    if let Some(&bad) = std::iter::once(&p).chain(poles).chain(probes).find(|&&i| i >= n) {
        return Err(PotentialError::InvalidParameter {
            name: "node",
            reason: format!("node {bad} is not an interior node"),
        });
    }
    let limit = 4.0 * grid.h();
    let pole_distances: Vec<f64> = poles
        .iter()
        .map(|&q| grid.shape().boundary_distance(grid.point(q)))
        .collect();
    if let Some((k, &distance)) = pole_distances.iter().enumerate().find(|(_, d)| **d < limit) {
        return Err(PotentialError::PoleTooCloseToBoundary {
            pole: poles[k],
            distance,
            limit,
        });
    }
    let columns = oracle.columns(poles, false)?;
    let kernels: Vec<Vec<f64>> = columns
        .iter()
        .map(|col| {
            let norm = col[p];
            col.values.iter().map(|v| v / norm).collect()
        })
        .collect();
    let probe_values: Vec<Vec<f64>> = kernels.iter().map(|k| probes.iter().map(|&x| k[x]).collect()).collect();
    let successive_sup = probe_values
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .collect();
    Ok(MartinSequence {
        basepoint: p,
        poles: poles.to_vec(),
        pole_distances,
        probes: probes.to_vec(),
        kernels,
        probe_values,
        successive_sup,
    })
}

/// Poisson kernel of the unit disk, `(1 − |x|²) / |x − ζ|²`.
pub fn poisson_kernel_disk(x: Point, zeta: Point) -> Result<f64, PotentialError> {
    let (xn, zn) = (x.norm(), zeta.norm());
    if !(xn < 1.0) || !((zn - 1.0).abs() <= 1e-12) {
        return Err(PotentialError::ArgumentOutOfDomain {
            x_norm: xn,
            zeta_norm: zn,
        });
    }
    Ok((1.0 - x.norm_sq()) / (x - zeta).norm_sq())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::domain::{rasterize, DomainSpec};
    use crate::elliptic::{discretize, OperatorSpec};
    use crate::green::pole_excluded;

    #[test]
    fn poisson_kernel_values() {
        let z = Point::new(1.0, 0.0);
        assert_eq!(poisson_kernel_disk(Point::ORIGIN, Point::new(0.6, 0.8)).unwrap(), 1.0);
        assert!((poisson_kernel_disk(Point::new(0.5, 0.0), z).unwrap() - 3.0).abs() < 1e-15);
        assert!((poisson_kernel_disk(Point::new(-0.5, 0.0), z).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(poisson_kernel_disk(Point::new(1.0, 0.0), z).is_err());
        assert!(poisson_kernel_disk(Point::ORIGIN, Point::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn poisson_kernel_has_unit_mean() {
        let x = Point::new(0.3, -0.55);
        let m = 10_000;
        let sum: f64 = (0..m)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / m as f64;
                poisson_kernel_disk(x, Point::new(t.cos(), t.sin())).unwrap()
            })
            .sum();
        assert!((sum / m as f64 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernels_are_normalized_and_harmonic() {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, 1.0 / 32.0).unwrap());
        let o = GreenOracle::new(discretize(&OperatorSpec::laplacian(), &g).unwrap());
        let p = g.node_at(Point::ORIGIN).unwrap();
        let poles: Vec<usize> = [0.5, 0.75, 0.8125]
            .iter()
            .map(|&x| g.node_at(Point::new(x, 0.0)).unwrap())
            .collect();
        let probes: Vec<usize> = (0..g.interior_count()).step_by(7).collect();
        let seq = martin_sequence(&o, p, &poles, &probes).unwrap();
        for (k, &q) in seq.kernels.iter().zip(&poles) {
            assert_eq!(k[p], 1.0);
            let lk = o.op().matrix().matvec(k);
            for i in 0..g.interior_count() {
                assert!(k[i] > 0.0);
                if !pole_excluded(&g, q, i) {
                    assert!(lk[i].abs() < 1e-9, "{}", lk[i]);
                }
            }
        }
        assert_eq!(seq.successive_sup.len(), 2);
        let close = g.node_at(Point::new(0.9375, 0.0)).unwrap();
        assert!(matches!(
            martin_sequence(&o, p, &[close], &probes),
            Err(PotentialError::PoleTooCloseToBoundary { .. })
        ));
    }
}

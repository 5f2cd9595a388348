use rayon::prelude::*;
use serde::Serialize;

use super::{GreenError, GreenOracle};
use crate::elliptic::principal_eigenvalue;

#[derive(Debug, Clone, Serialize)]
pub struct ResolventProbe {
    pub x: usize,
    pub y: usize,
    pub g: f64,
    pub g_t: f64,
    /// `h² Σ_z G(x,z) G^t(z,y)`
    pub composition: f64,
    pub residual: f64,
    pub monotone: bool,
    pub composition_bounded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventReport {
    pub t: f64,
    pub tau: f64,
    pub probes: Vec<ResolventProbe>,
    pub max_residual: f64,
    pub mean_residual: f64,
    /// `G ≤ G^t` at every probe.
    pub monotone: bool,
    /// `G∘G^t ≤ G^t / t` at every probe (vacuous for `t = 0`).
    pub composition_bounded: bool,
}

/// Check `G^t = G + t·G∘G^t` on probe pairs.
///
/// `oracle` must hold the unshifted operator (or any base `L`); the shifted
/// oracle for `L - t` is built internally. `τ` comes from the spectral data
/// attached to the operator, or is computed when absent.
pub fn verify_resolvent(
    oracle: &GreenOracle,
    t: f64,
    probes: &[(usize, usize)],
) -> Result<ResolventReport, GreenError> {
    let tau = match oracle.op().spectral() {
        Some(info) => info.tau_estimate,
        None => principal_eigenvalue(oracle.op(), 1e-8)?.tau_estimate,
    };
    if !(t >= 0.0 && t < tau) {
        return Err(GreenError::ShiftExceedsTau { t, tau });
    }
    for &(x, y) in probes {
        if x == y {
            return Err(GreenError::DegenerateProbe(x));
        }
    }
    let shifted = oracle.shifted(t, false)?;
    let h2 = oracle.h() * oracle.h();
    let rows: Vec<_> = {
        let xs: Vec<usize> = probes.iter().map(|p| p.0).collect();
        oracle.columns(&xs, true)?
    };
    let cols_t: Vec<_> = {
        let ys: Vec<usize> = probes.iter().map(|p| p.1).collect();
        shifted.columns(&ys, false)?
    };
    let cols: Vec<_> = {
        let ys: Vec<usize> = probes.iter().map(|p| p.1).collect();
        oracle.columns(&ys, false)?
    };
    let out: Vec<ResolventProbe> = probes
        .par_iter()
        .enumerate()
        .map(|(k, &(x, y))| {
            let row = &rows[k].values;
            let col_t = &cols_t[k].values;
            let composition = h2 * row.iter().zip(col_t).map(|(a, b)| a * b).sum::<f64>();
            let g = cols[k].values[x];
            let g_t = col_t[x];
            let residual = (g_t - g - t * composition).abs() / g_t;
            ResolventProbe {
                x,
                y,
                g,
                g_t,
                composition,
                residual,
                monotone: g <= g_t,
                composition_bounded: t == 0.0 || composition <= g_t / t,
            }
        })
        .collect();
    let max_residual = out.iter().map(|p| p.residual).fold(0.0, f64::max);
    let mean_residual = if out.is_empty() {
        0.0
    } else {
        out.iter().map(|p| p.residual).sum::<f64>() / out.len() as f64
    };
    Ok(ResolventReport {
        t,
        tau,
        monotone: out.iter().all(|p| p.monotone),
        composition_bounded: out.iter().all(|p| p.composition_bounded),
        probes: out,
        max_residual,
        mean_residual,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domain::{rasterize, DomainSpec};
    use crate::elliptic::{discretize, OperatorSpec};

    #[test]
    fn identity_holds_at_matrix_level() {
        let g = Arc::new(rasterize(&DomainSpec::UnitDisk, 1.0 / 32.0).unwrap());
        let spec = OperatorSpec::laplacian().with_drift("0.5*x", 0.0);
        let op = discretize(&spec, &g).unwrap();
        let info = principal_eigenvalue(&op, 1e-8).unwrap();
        let oracle = GreenOracle::new(op.with_spectral(info.clone()));
        let probes = [(3, 400), (100, 7), (250, 251), (600, 12)];
        let zero = verify_resolvent(&oracle, 0.0, &probes).unwrap();
        assert!(zero.max_residual < 1e-14);
        let r = verify_resolvent(&oracle, info.theta, &probes).unwrap();
        assert!(r.max_residual < 1e-10, "{}", r.max_residual);
        assert!(r.monotone && r.composition_bounded);
        assert!(matches!(
            verify_resolvent(&oracle, info.tau_estimate, &probes),
            Err(GreenError::ShiftExceedsTau { .. })
        ));
        assert!(matches!(
            verify_resolvent(&oracle, 1.0, &[(5, 5)]),
            Err(GreenError::DegenerateProbe(5))
        ));
    }
}

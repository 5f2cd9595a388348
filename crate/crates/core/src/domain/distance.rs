use rayon::prelude::*;
use serde::Serialize;

use super::{DomainError, GridDomain};
use crate::geometry::Point;

/// Distance-to-boundary values on the interior nodes of a grid.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceField {
    pub values: Vec<f64>,
    pub smoothed: bool,
    /// Two-sided comparability constant against the exact field.
    pub smoothing_constant_c0: Option<f64>,
    /// Largest difference quotient over grid edges.
    pub gradient_bound_c1: Option<f64>,
    pub radius_factor: Option<f64>,
}

impl DistanceField {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for DistanceField {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Exact Euclidean distance from every interior node to the analytic boundary.
pub fn distance_to_boundary(grid: &GridDomain) -> DistanceField {
    let shape = grid.shape();
    let values = (0..grid.interior_count())
        .into_par_iter()
        .map(|n| shape.boundary_distance(grid.point(n)))
        .collect();
    DistanceField {
        values,
        smoothed: false,
        smoothing_constant_c0: None,
        gradient_bound_c1: None,
        radius_factor: None,
    }
}

/// Polar quadrature for the normalized bump `(1 - s²)²` on the unit disk.
/// Symmetric under `s -> -s`, so affine functions are reproduced exactly.
fn bump_quadrature() -> Vec<(Point, f64)> {
    // 6-point Gauss-Legendre on [0, 1]
    const GL_X: [f64; 6] = [
        -0.932_469_514_203_152,
        -0.661_209_386_466_264_5,
        -0.238_619_186_083_196_9,
        0.238_619_186_083_196_9,
        0.661_209_386_466_264_5,
        0.932_469_514_203_152,
    ];
    const GL_W: [f64; 6] = [
        0.171_324_492_379_170_3,
        0.360_761_573_048_138_6,
        0.467_913_934_572_691,
        0.467_913_934_572_691,
        0.360_761_573_048_138_6,
        0.171_324_492_379_170_3,
    ];
    const ANGLES: usize = 16;
    let mut nodes = Vec::with_capacity(GL_X.len() * ANGLES);
    let mut total = 0.0;
    for (x, w) in GL_X.iter().zip(GL_W) {
        let s = 0.5 * (x + 1.0);
        let radial = 0.5 * w * s * (1.0 - s * s).powi(2);
        for k in 0..ANGLES {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / ANGLES as f64;
            nodes.push((Point::new(s * phi.cos(), s * phi.sin()), radial));
            total += radial;
        }
    }
    for node in &mut nodes {
        node.1 /= total;
    }
    nodes
}

/// Mollify the exact distance with a bump of radius `radius_factor · đ(p)`.
///
/// The exact distance is evaluated analytically under the bump, so the
/// result does not inherit lattice bias. The returned field records the
/// measured comparability constant `c0 = max(sup ð/đ, sup đ/ð)` and the
/// largest edge difference quotient `c1`.
pub fn smooth_distance(
    grid: &GridDomain,
    field: &DistanceField,
    radius_factor: f64,
) -> Result<DistanceField, DomainError> {
    if field.smoothed {
        return Err(DomainError::AlreadySmoothed);
    }
    if !(radius_factor > 0.0 && radius_factor <= 0.5) {
        return Err(DomainError::InvalidParameter {
            name: "radius_factor",
            reason: format!("must lie in (0, 1/2], got {radius_factor}"),
        });
    }
    let shape = grid.shape();
    let quad = bump_quadrature();
    let values: Vec<f64> = (0..grid.interior_count())
        .into_par_iter()
        .map(|n| {
            let p = grid.point(n);
            let radius = radius_factor * field.values[n];
            quad.iter()
                .map(|&(offset, w)| w * shape.boundary_distance(p + offset * radius))
                .sum()
        })
        .collect();

    let c0 = values
        .iter()
        .zip(&field.values)
        .map(|(s, d)| (s / d).max(d / s))
        .fold(1.0, f64::max);
    let c1 = edge_gradient_bound(grid, &values);
    Ok(DistanceField {
        values,
        smoothed: true,
        smoothing_constant_c0: Some(c0),
        gradient_bound_c1: Some(c1),
        radius_factor: Some(radius_factor),
    })
}

/// Largest `|f(p) - f(q)| / |p - q|` over interior 4-neighbour edges.
pub fn edge_gradient_bound(grid: &GridDomain, values: &[f64]) -> f64 {
    let h = grid.h();
    (0..grid.interior_count())
        .into_par_iter()
        .map(|n| {
            grid.interior_neighbors4(n)
                .map(|m| (values[n] - values[m]).abs() / h)
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Jump between the difference quotients of the two collinear edge pairs
/// through `node`, `max over axes |f(p+e) - 2f(p) + f(p-e)| / h`.
pub fn edge_gradient_jump_at(grid: &GridDomain, values: &[f64], node: usize) -> f64 {
    use super::Neighbor;
    let mut jump: f64 = 0.0;
    for (di, dj) in [(1, 0), (0, 1)] {
        if let (Neighbor::Interior(a), Neighbor::Interior(b)) =
            (grid.neighbor(node, di, dj), grid.neighbor(node, -di, -dj))
        {
            jump = jump.max((values[a] - 2.0 * values[node] + values[b]).abs() / grid.h());
        }
    }
    jump
}

/// Largest jump between the difference quotients of two consecutive
/// collinear edges, `|f(p+e) - 2f(p) + f(p-e)| / h`, optionally restricted to
/// nodes selected by `keep`.
pub fn edge_gradient_jump(grid: &GridDomain, values: &[f64], keep: impl Fn(usize) -> bool + Sync) -> f64 {
    (0..grid.interior_count())
        .into_par_iter()
        .filter(|&n| keep(n))
        .map(|n| edge_gradient_jump_at(grid, values, n))
        .reduce(|| 0.0, f64::max)
}

use std::sync::Arc;

use rayon::prelude::*;

use super::{rasterize, DistanceField, DomainError, DomainSpec, GridDomain};
use crate::geometry::Point;

/// `D_f = {(x1, x2) : |x1| < f(|x2|), |x2| < extent}` with
/// `f(t) = c1·t^power + c2`.
#[derive(Debug, Clone, Copy)]
pub struct ProfileCurve {
    pub c1: f64,
    pub c2: f64,
    pub power: f64,
    pub extent: f64,
}

const SCAN_SAMPLES: usize = 64;

impl ProfileCurve {
    pub fn new(c1: f64, c2: f64, power: f64, extent: f64) -> Self {
        ProfileCurve { c1, c2, power, extent }
    }

    #[inline]
    pub fn f(&self, t: f64) -> f64 {
        self.c1 * t.powf(self.power) + self.c2
    }

    fn df(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return if self.power < 1.0 {
                f64::INFINITY
            } else if self.power == 1.0 {
                self.c1
            } else {
                0.0
            };
        }
        self.c1 * self.power * t.powf(self.power - 1.0)
    }

    fn d2f(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.c1 * self.power * (self.power - 1.0) * t.powf(self.power - 2.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        let t = p.y.abs();
        t < self.extent && p.x.abs() < self.f(t)
    }

    /// Exact distance to the boundary: the two graph branches and the caps.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        // reflect into the first quadrant; the mirrored branches are never closer
        let q = Point::new(p.x.abs(), p.y.abs());
        let cap = (self.extent - q.y).abs();
        cap.min(self.curve_distance(q))
    }

    /// Distance from `q` (first quadrant) to `{(f(t), t) : t ∈ [0, extent]}`
    /// by a window scan followed by a safeguarded Newton projection.
    fn curve_distance(&self, q: Point) -> f64 {
        let (a, b) = (q.x, q.y);
        let g = |t: f64| {
            let dx = a - self.f(t);
            let dy = b - t;
            dx * dx + dy * dy
        };
        let t0 = b.min(self.extent);
        // the nearest curve point lies within this radius of q
        let bound = g(t0).sqrt() + (b - t0);
        let lo = (b - bound).max(0.0);
        let hi = (b + bound).min(self.extent);
        let step = (hi - lo) / SCAN_SAMPLES as f64;
        let mut best = (g(lo), 0usize);
        for k in 1..=SCAN_SAMPLES {
            let v = g(lo + step * k as f64);
            if v < best.0 {
                best = (v, k);
            }
        }
        if step == 0.0 {
            return best.0.sqrt();
        }
        let mut left = lo + step * best.1.saturating_sub(1) as f64;
        let mut right = (lo + step * (best.1 + 1) as f64).min(hi);
        let dg = |t: f64| -2.0 * (a - self.f(t)) * self.df(t) - 2.0 * (b - t);
        let mut best_val = best.0;
        let mut t = lo + step * best.1 as f64;
        for _ in 0..100 {
            let gp = dg(t);
            if !gp.is_finite() {
                t = 0.5 * (left + right);
                continue;
            }
            if gp > 0.0 {
                right = t;
            } else {
                left = t;
            }
            let df = self.df(t);
            let gpp = 2.0 * df * df - 2.0 * (a - self.f(t)) * self.d2f(t) + 2.0;
            let mut next = t - gp / gpp;
            if !(next > left && next < right) || !next.is_finite() {
                next = 0.5 * (left + right);
            }
            if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) {
                t = next;
                break;
            }
            t = next;
            if right - left <= 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        best_val = best_val.min(g(t)).min(g(left)).min(g(right));
        best_val.sqrt()
    }
}

/// The symmetry plane `{x1 = 0}` of the three-dimensional profile domain
/// `{(x1, x') ∈ R × R² : |x1| < f(|x'|)}`, truncated to `|x'|∞ < extent`.
///
/// Returns a square lattice in the `x'` plane with the distance of each
/// node to the boundary of the three-dimensional domain. That distance is
/// the planar profile distance from `(0, |x'|)` (the nearest boundary point
/// lies in the plane through the `x1` axis and `x'`), capped by the
/// truncation. Unlike the planar domain, the slice has no neck at the
/// origin, so pairs `(0, ±k)` can be joined around it.
pub fn rotational_slice(spec: &DomainSpec, h: f64) -> Result<(Arc<GridDomain>, Arc<DistanceField>), DomainError> {
    spec.validate()?;
    let DomainSpec::Profile {
        c1,
        c2,
        power,
        x_extent,
    } = *spec
    else {
        return Err(DomainError::InvalidParameter {
            name: "kind",
            reason: format!("rotational slices need a profile domain, got {}", spec.name()),
        });
    };
    let grid = Arc::new(rasterize(&DomainSpec::Square { side: 2.0 * x_extent }, h)?);
    let curve = ProfileCurve::new(c1, c2, power, f64::INFINITY);
    let values = (0..grid.interior_count())
        .into_par_iter()
        .map(|n| {
            let p = grid.point(n);
            curve
                .boundary_distance(Point::new(0.0, p.norm()))
                .min(grid.shape().boundary_distance(p))
        })
        .collect();
    let field = DistanceField {
        values,
        smoothed: false,
        smoothing_constant_c0: None,
        gradient_bound_c1: None,
        radius_factor: None,
    };
    Ok((grid, Arc::new(field)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_sampling_distance(c: &ProfileCurve, p: Point, samples: usize) -> f64 {
        let mut best = (c.extent - p.y.abs()).abs();
        for k in 0..=samples {
            let t = c.extent * k as f64 / samples as f64;
            for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                best = best.min(p.dist(Point::new(sx * c.f(t), sy * t)));
            }
        }
        best
    }

    #[test]
    fn linear_profile_matches_point_line_distance() {
        let c = ProfileCurve::new(1.0, 1.0, 1.0, 100.0);
        for t in [5.0, 10.0, 20.0] {
            let d = c.boundary_distance(Point::new(0.0, t));
            let line = (t + 1.0) / 2f64.sqrt();
            assert!((d - line).abs() < 1e-12, "t={t}: {d} vs {line}");
            let sampled = dense_sampling_distance(&c, Point::new(0.0, t), 200_000);
            assert!((d - sampled).abs() < 1e-6);
        }
    }

    #[test]
    fn sqrt_profile_against_dense_sampling() {
        let c = ProfileCurve::new(1.0, 1.0, 0.5, 20.0);
        for p in [
            Point::new(0.0, 0.0),
            Point::new(0.5, 0.1),
            Point::new(-1.0, 3.0),
            Point::new(2.0, 9.0),
            Point::new(0.0, -15.0),
        ] {
            assert!(c.contains(p));
            let d = c.boundary_distance(p);
            let s = dense_sampling_distance(&c, p, 400_000);
            assert!(d <= s + 1e-12 && s - d < 1e-4, "{p:?}: {d} vs {s}");
        }
    }

    #[test]
    fn slice_distance_is_radial() {
        let spec = DomainSpec::Profile {
            c1: 1.0,
            c2: 0.5,
            power: 1.0,
            x_extent: 4.0,
        };
        let (g, d) = rotational_slice(&spec, 0.125).unwrap();
        for (x, y) in [(1.0, 0.0), (0.0, -1.0), (-1.0, 0.0)] {
            let n = g.node_at(Point::new(x, y)).unwrap();
            // unit radius: the line x1 = t + 1/2 is 1.5/√2 away
            assert!((d[n] - 1.5 / 2f64.sqrt()).abs() < 1e-12, "{}", d[n]);
        }
        let corner = g.node_at(Point::new(3.875, 3.875)).unwrap();
        assert_eq!(d[corner], 0.125);
        assert!(rotational_slice(&DomainSpec::UnitDisk, 0.125).is_err());
    }
}

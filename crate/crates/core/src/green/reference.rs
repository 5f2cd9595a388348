use std::f64::consts::PI;

use super::GreenError;
use crate::geometry::Point;

/// Surface area of the unit sphere `S^{n-1} ⊂ ℝⁿ`.
pub fn sphere_area(n: u32) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// Fundamental solution of `-Δ` in `ℝⁿ` at distance `|x - y|`, positive near
/// the pole: `-(1/2π) ln r` for `n = 2`, `r^{2-n} / ((n-2)|S^{n-1}|)` above.
pub fn euclidean_green(x: &[f64], y: &[f64], n: u32) -> Result<f64, GreenError> {
    if n < 2 {
        return Err(GreenError::InvalidDimension(n));
    }
    if x.len() != n as usize || y.len() != n as usize {
        return Err(GreenError::DimensionMismatch {
            what: "point",
            got: x.len().min(y.len()),
            expected: n as usize,
        });
    }
    let r = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(GreenError::CoincidentPoints);
    }
    Ok(if n == 2 {
        -r.ln() / (2.0 * PI)
    } else {
        r.powf(2.0 - n as f64) / ((n as f64 - 2.0) * sphere_area(n))
    })
}

/// Dirichlet Green's function of `-Δ` on the unit disk,
/// `-(1/2π) ln(|x - y| / (|y|·|x - y*|))` with `y* = y/|y|²`.
pub fn disk_green(x: Point, y: Point) -> f64 {
    let ny = y.norm();
    if ny == 0.0 {
        return -x.norm().ln() / (2.0 * PI);
    }
    let star = y * (1.0 / (ny * ny));
    -(x.dist(y) / (ny * x.dist(star))).ln() / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let g3 = euclidean_green(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 3).unwrap();
        assert!((g3 - 0.079_577_471_545_947_67).abs() < 1e-15);
        assert_eq!(euclidean_green(&[0.0, 0.0], &[0.0, 1.0], 2).unwrap(), 0.0);
        let e = (-1.0f64).exp();
        let g2 = euclidean_green(&[0.0, 0.0], &[e, 0.0], 2).unwrap();
        assert!((g2 - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert_eq!(
            euclidean_green(&[1.0, 2.0], &[1.0, 2.0], 2),
            Err(GreenError::CoincidentPoints)
        );
        assert_eq!(euclidean_green(&[1.0], &[2.0], 1), Err(GreenError::InvalidDimension(1)));
    }

    #[test]
    fn disk_green_symmetry_and_boundary() {
        let (x, y) = (Point::new(0.3, -0.2), Point::new(-0.1, 0.5));
        assert!((disk_green(x, y) - disk_green(y, x)).abs() < 1e-14);
        let b = Point::new(0.6, 0.8);
        assert!(disk_green(b, y).abs() < 1e-14);
        assert!((disk_green(x, Point::ORIGIN) + x.norm().ln() / (2.0 * PI)).abs() < 1e-15);
    }
}

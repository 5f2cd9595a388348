use crate::geometry::{segment_distance, Point};

/// Vertices of the Koch snowflake after `iterations` refinements of an
/// equilateral triangle with the given side, counter-clockwise, centroid at
/// the origin.
pub fn koch_polygon(iterations: u32, side: f64) -> Vec<Point> {
    let circumradius = side / 3f64.sqrt();
    let mut verts: Vec<Point> = (0..3)
        .map(|k| {
            let a = std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
            Point::new(circumradius * a.cos(), circumradius * a.sin())
        })
        .collect();
    for _ in 0..iterations {
        let n = verts.len();
        let mut next = Vec::with_capacity(4 * n);
        for i in 0..n {
            let p = verts[i];
            let q = verts[(i + 1) % n];
            let third = (q - p) * (1.0 / 3.0);
            let a = p + third;
            let b = p + third * 2.0;
            // outward bump: right of the direction for a CCW polygon
            let apex = a + third.rotate(-std::f64::consts::FRAC_PI_3);
            next.extend_from_slice(&[p, a, apex, b]);
        }
        verts = next;
    }
    verts
}

/// Simple closed polygon with crossing-number membership and segment-soup
/// distance queries.
#[derive(Debug, Clone)]
pub struct Polygon {
    verts: Vec<Point>,
}

impl Polygon {
    pub fn new(verts: Vec<Point>) -> Self {
        Polygon { verts }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.verts
    }

    fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.verts.len();
        (0..n).map(move |i| (self.verts[i], self.verts[(i + 1) % n]))
    }

    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        // points on an edge are not strictly inside
        inside && self.boundary_distance(p) > 0.0
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.verts {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    /// Shoelace area.
    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;

    #[test]
    fn shoelace_matches_closed_form_area() {
        for n in 0..=5 {
            let poly = Polygon::new(koch_polygon(n, 3.0));
            assert_eq!(poly.vertices().len(), 3 * 4usize.pow(n));
            let exact = DomainSpec::KochSnowflake { iterations: n }.area();
            assert!((poly.area() - exact).abs() < 1e-10 * exact, "n={n}");
        }
    }

    #[test]
    fn centroid_inside() {
        let poly = Polygon::new(koch_polygon(2, 3.0));
        assert!(poly.contains(Point::ORIGIN));
        assert!(!poly.contains(Point::new(5.0, 0.0)));
    }
}

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::koch::{koch_polygon, Polygon};
use super::profile::ProfileCurve;
use super::DomainError;
use crate::geometry::Point;

/// Parametric description of a planar domain.
///
/// All shapes are centered at the origin. `square_minus_ball` removes a closed
/// disk that is internally tangent to the top side of the square, so the
/// domain is connected and has two outward cusps at `(0, side/2)`.
/// `profile` is `{|x1| < c1·|x2|^power + c2}` truncated to `|x2| < x_extent`.
/// The Koch snowflake starts from an equilateral triangle of side 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    UnitDisk,
    Annulus {
        r_in: f64,
        r_out: f64,
    },
    Square {
        side: f64,
    },
    SquareMinusBall {
        side: f64,
        hole_radius: f64,
    },
    Profile {
        c1: f64,
        c2: f64,
        power: f64,
        x_extent: f64,
    },
    Strip {
        width: f64,
        length: f64,
    },
    KochSnowflake {
        iterations: u32,
    },
}

pub const KOCH_SIDE: f64 = 3.0;
pub const KOCH_MAX_ITERATIONS: u32 = 6;

fn positive(name: &'static str, v: f64) -> Result<(), DomainError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(DomainError::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {v}"),
        })
    }
}

impl DomainSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DomainSpec::UnitDisk => "unit_disk",
            DomainSpec::Annulus { .. } => "annulus",
            DomainSpec::Square { .. } => "square",
            DomainSpec::SquareMinusBall { .. } => "square_minus_ball",
            DomainSpec::Profile { .. } => "profile",
            DomainSpec::Strip { .. } => "strip",
            DomainSpec::KochSnowflake { .. } => "koch_snowflake",
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        match *self {
            DomainSpec::UnitDisk => Ok(()),
            DomainSpec::Annulus { r_in, r_out } => {
                positive("r_in", r_in)?;
                positive("r_out", r_out)?;
                if r_in >= r_out {
                    return Err(DomainError::InvalidParameter {
                        name: "r_in",
                        reason: format!("r_in ({r_in}) must be < r_out ({r_out})"),
                    });
                }
                Ok(())
            }
            DomainSpec::Square { side } => positive("side", side),
            DomainSpec::SquareMinusBall { side, hole_radius } => {
                positive("side", side)?;
                positive("hole_radius", hole_radius)?;
                if hole_radius >= side / 2.0 {
                    return Err(DomainError::InvalidParameter {
                        name: "hole_radius",
                        reason: format!("must be < side/2 = {}", side / 2.0),
                    });
                }
                Ok(())
            }
            DomainSpec::Profile {
                c1,
                c2,
                power,
                x_extent,
            } => {
                positive("c1", c1)?;
                positive("c2", c2)?;
                positive("power", power)?;
                positive("x_extent", x_extent)
            }
            DomainSpec::Strip { width, length } => {
                positive("width", width)?;
                positive("length", length)
            }
            DomainSpec::KochSnowflake { iterations } => {
                if iterations > KOCH_MAX_ITERATIONS {
                    return Err(DomainError::InvalidParameter {
                        name: "iterations",
                        reason: format!("must be in [0, {KOCH_MAX_ITERATIONS}], got {iterations}"),
                    });
                }
                Ok(())
            }
        }
    }

    /// Width of the thinnest part of the domain that must be resolved.
    pub fn narrowest_feature(&self) -> f64 {
        match *self {
            DomainSpec::UnitDisk => 2.0,
            DomainSpec::Annulus { r_in, r_out } => r_out - r_in,
            DomainSpec::Square { side } => side,
            DomainSpec::SquareMinusBall { side, hole_radius } => side - 2.0 * hole_radius,
            DomainSpec::Profile { c2, x_extent, .. } => (2.0 * c2).min(2.0 * x_extent),
            DomainSpec::Strip { width, length } => width.min(length),
            DomainSpec::KochSnowflake { iterations } => KOCH_SIDE / 3f64.powi(iterations as i32),
        }
    }

    /// Exact area of the domain.
    pub fn area(&self) -> f64 {
        match *self {
            DomainSpec::UnitDisk => PI,
            DomainSpec::Annulus { r_in, r_out } => PI * (r_out * r_out - r_in * r_in),
            DomainSpec::Square { side } => side * side,
            DomainSpec::SquareMinusBall { side, hole_radius } => side * side - PI * hole_radius * hole_radius,
            DomainSpec::Profile {
                c1,
                c2,
                power,
                x_extent,
            } => 4.0 * (c1 * x_extent.powf(power + 1.0) / (power + 1.0) + c2 * x_extent),
            DomainSpec::Strip { width, length } => width * length,
            DomainSpec::KochSnowflake { iterations } => {
                let a0 = 3f64.sqrt() / 4.0 * KOCH_SIDE * KOCH_SIDE;
                a0 * (1.6 - 0.6 * (4.0f64 / 9.0).powi(iterations as i32))
            }
        }
    }

    /// Compile the spec into a queryable shape. Validates first.
    pub fn shape(&self) -> Result<Shape, DomainError> {
        self.validate()?;
        Ok(match *self {
            DomainSpec::UnitDisk => Shape::Disk { radius: 1.0 },
            DomainSpec::Annulus { r_in, r_out } => Shape::Annulus { r_in, r_out },
            DomainSpec::Square { side } => Shape::Rect {
                half_w: side / 2.0,
                half_h: side / 2.0,
            },
            DomainSpec::SquareMinusBall { side, hole_radius } => Shape::SquareMinusBall {
                half: side / 2.0,
                center: Point::new(0.0, side / 2.0 - hole_radius),
                radius: hole_radius,
            },
            DomainSpec::Profile {
                c1,
                c2,
                power,
                x_extent,
            } => Shape::Profile(ProfileCurve::new(c1, c2, power, x_extent)),
            DomainSpec::Strip { width, length } => Shape::Rect {
                half_w: length / 2.0,
                half_h: width / 2.0,
            },
            DomainSpec::KochSnowflake { iterations } => {
                Shape::Polygon(Polygon::new(koch_polygon(iterations, KOCH_SIDE)))
            }
        })
    }
}

/// Geometric queries compiled from a [`DomainSpec`].
#[derive(Debug, Clone)]
pub enum Shape {
    Disk { radius: f64 },
    Annulus { r_in: f64, r_out: f64 },
    Rect { half_w: f64, half_h: f64 },
    SquareMinusBall { half: f64, center: Point, radius: f64 },
    Profile(ProfileCurve),
    Polygon(Polygon),
}

impl Shape {
    /// Strict membership in the open domain.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Shape::Disk { radius } => p.norm_sq() < radius * radius,
            Shape::Annulus { r_in, r_out } => {
                let r2 = p.norm_sq();
                r2 > r_in * r_in && r2 < r_out * r_out
            }
            Shape::Rect { half_w, half_h } => p.x.abs() < *half_w && p.y.abs() < *half_h,
            Shape::SquareMinusBall { half, center, radius } => {
                p.x.abs() < *half && p.y.abs() < *half && (p - *center).norm_sq() > radius * radius
            }
            Shape::Profile(curve) => curve.contains(p),
            Shape::Polygon(poly) => poly.contains(p),
        }
    }

    /// Euclidean distance from an interior point to the boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match self {
            Shape::Disk { radius } => (radius - p.norm()).abs(),
            Shape::Annulus { r_in, r_out } => {
                let r = p.norm();
                (r - r_in).abs().min((r_out - r).abs())
            }
            Shape::Rect { half_w, half_h } => (half_w - p.x.abs()).min(half_h - p.y.abs()).abs(),
            Shape::SquareMinusBall { half, center, radius } => {
                let sq = (half - p.x.abs()).min(half - p.y.abs());
                let ball = (p - *center).norm() - radius;
                sq.min(ball).abs()
            }
            Shape::Profile(curve) => curve.boundary_distance(p),
            Shape::Polygon(poly) => poly.boundary_distance(p),
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        let sym = |w: f64, h: f64| (Point::new(-w, -h), Point::new(w, h));
        match self {
            Shape::Disk { radius } => sym(*radius, *radius),
            Shape::Annulus { r_out, .. } => sym(*r_out, *r_out),
            Shape::Rect { half_w, half_h } => sym(*half_w, *half_h),
            Shape::SquareMinusBall { half, .. } => sym(*half, *half),
            Shape::Profile(curve) => sym(curve.f(curve.extent), curve.extent),
            Shape::Polygon(poly) => poly.bounding_box(),
        }
    }
}

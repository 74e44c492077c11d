use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tensor::Vec3;

/// Unit-sized reference object `B`, centred at the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitShape {
    Sphere,
    /// Semi-axes along x, y, z; the largest is 1.
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// Axis-aligned cube of the given side, centred at the origin.
    Cube { side: f64 },
}

impl UnitShape {
    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        let s = UnitShape::Ellipsoid { a, b, c };
        s.validate()?;
        Ok(s)
    }

    pub fn cube(side: f64) -> Result<Self> {
        let s = UnitShape::Cube { side };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            UnitShape::Sphere => Ok(()),
            UnitShape::Ellipsoid { a, b, c } => {
                if !(a > 0.0 && b > 0.0 && c > 0.0) {
                    return Err(Error::domain("ellipsoid semi-axes must be positive"));
                }
                let m = a.max(b).max(c);
                if (m - 1.0).abs() > 1e-12 {
                    return Err(Error::domain(format!("largest ellipsoid semi-axis must be 1, got {m}")));
                }
                Ok(())
            }
            UnitShape::Cube { side } => {
                if !(side > 0.0) || side * 3f64.sqrt() / 2.0 > 1.0 + 1e-12 {
                    return Err(Error::domain(format!(
                        "cube side must lie in (0, 2/sqrt(3)] to fit the unit ball, got {side}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match *self {
            UnitShape::Sphere => 4.0 * PI / 3.0,
            UnitShape::Ellipsoid { a, b, c } => 4.0 * PI / 3.0 * a * b * c,
            UnitShape::Cube { side } => side * side * side,
        }
    }

    pub fn bounding_radius(&self) -> f64 {
        match *self {
            UnitShape::Sphere => 1.0,
            UnitShape::Ellipsoid { a, b, c } => a.max(b).max(c),
            UnitShape::Cube { side } => side * 3f64.sqrt() / 2.0,
        }
    }

    /// Distance from the origin to the boundary along the unit direction `d`.
    pub fn radial_extent(&self, d: &Vec3) -> f64 {
        match *self {
            UnitShape::Sphere => 1.0,
            UnitShape::Ellipsoid { a, b, c } => {
                1.0 / ((d[0] / a).powi(2) + (d[1] / b).powi(2) + (d[2] / c).powi(2)).sqrt()
            }
            UnitShape::Cube { side } => {
                let m = d[0].abs().max(d[1].abs()).max(d[2].abs());
                0.5 * side / m
            }
        }
    }

    /// Level-set value: negative inside, zero on the boundary, positive
    /// outside. Exact signed distance for the sphere and cube interior; a
    /// scaled implicit function for the ellipsoid.
    pub fn level_set(&self, p: &Vec3) -> f64 {
        match *self {
            UnitShape::Sphere => (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.0,
            UnitShape::Ellipsoid { a, b, c } => {
                ((p[0] / a).powi(2) + (p[1] / b).powi(2) + (p[2] / c).powi(2)).sqrt() - 1.0
            }
            UnitShape::Cube { side } => {
                p[0].abs().max(p[1].abs()).max(p[2].abs()) - 0.5 * side
            }
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.level_set(p) <= 0.0
    }

    pub fn is_polyhedral(&self) -> bool {
        matches!(self, UnitShape::Cube { .. })
    }

    pub fn describe(&self) -> String {
        match *self {
            UnitShape::Sphere => "sphere".to_string(),
            UnitShape::Ellipsoid { a, b, c } => {
                format!("ellipsoid {} {} {}", fmt17(a), fmt17(b), fmt17(c))
            }
            UnitShape::Cube { side } => format!("cube {}", fmt17(side)),
        }
    }

    /// Parses the form produced by [`UnitShape::describe`].
    pub fn parse(s: &str) -> Result<Self> {
        let mut it = s.split_whitespace();
        let kind = it.next().unwrap_or("");
        let nums: Vec<f64> = it
            .map(|t| t.parse::<f64>().map_err(|_| Error::domain(format!("bad number '{t}' in shape"))))
            .collect::<Result<_>>()?;
        let shape = match (kind, nums.as_slice()) {
            ("sphere", []) => UnitShape::Sphere,
            ("ellipsoid", [a, b, c]) => UnitShape::Ellipsoid { a: *a, b: *b, c: *c },
            ("cube", [side]) => UnitShape::Cube { side: *side },
            _ => return Err(Error::domain(format!("unrecognised shape '{s}'"))),
        };
        shape.validate()?;
        Ok(shape)
    }
}

pub(crate) fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

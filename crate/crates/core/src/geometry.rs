//! Planar primitives shared by the world model, the sensors and the planners.

use crate::error::{Error, Result};

pub type Vec2 = nalgebra::Vector2<f64>;

/// Rectangular area of interest anchored at the origin: `[0, width] × [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Aoi {
    pub width: f64,
    pub height: f64,
}

impl Aoi {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        let aoi = Aoi { width, height };
        aoi.validate()?;
        Ok(aoi)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::invalid("aoi.width", "must be positive"));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::invalid("aoi.height", "must be positive"));
        }
        Ok(())
    }

    /// Closed containment.
    pub fn contains(&self, p: &Vec2) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.width * 0.5, self.height * 0.5)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

impl Default for Aoi {
    fn default() -> Self {
        Aoi {
            width: 150.0,
            height: 100.0,
        }
    }
}

/// A circular shadow. The boundary circle itself is not shadowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Vec2,
    pub radius: f64,
}

impl Disk {
    pub fn new(cx: f64, cy: f64, radius: f64) -> Self {
        Disk {
            center: Vec2::new(cx, cy),
            radius,
        }
    }

    pub fn contains_strictly(&self, p: &Vec2) -> bool {
        (p - self.center).norm_squared() < self.radius * self.radius
    }

    pub fn overlaps(&self, other: &Disk) -> bool {
        let reach = self.radius + other.radius;
        (self.center - other.center).norm_squared() <= reach * reach
    }
}

/// Axis-aligned square given by its center and half edge length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Square {
    pub center: Vec2,
    pub half_width: f64,
}

impl Square {
    /// Closed containment: points on the edge are inside.
    pub fn contains(&self, p: &Vec2) -> bool {
        (p.x - self.center.x).abs() <= self.half_width
            && (p.y - self.center.y).abs() <= self.half_width
    }

    pub fn min_corner(&self) -> Vec2 {
        self.center - Vec2::new(self.half_width, self.half_width)
    }

    pub fn max_corner(&self) -> Vec2 {
        self.center + Vec2::new(self.half_width, self.half_width)
    }
}

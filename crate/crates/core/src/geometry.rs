//! Pixel-space geometry. Origin is the top-left image corner, x grows to the
//! right and y grows downward. Pixel `(row i, col j)` covers the unit square
//! `[j, j+1) x [i, i+1)` and has its center at `(j + 0.5, i + 0.5)`.

use crate::error::{Error, Result};

/// A finite point in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2D {
    x: f64,
    y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid("point", "non-finite coordinate"));
        }
        Ok(Self { x, y })
    }

    /// Center of the pixel at `(row, col)`.
    pub fn pixel_center(row: usize, col: usize) -> Self {
        Self {
            x: col as f64 + 0.5,
            y: row as f64 + 0.5,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    #[cfg(test)]
    pub(crate) fn raw(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Axis-aligned rectangle with `x0 <= x1` and `y0 <= y1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl BoundingBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("bbox", "non-finite coordinate"));
        }
        if x0 > x1 || y0 > y1 {
            return Err(Error::invalid(
                "bbox",
                format!("corners out of order ({x0}, {y0}, {x1}, {y1})"),
            ));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    /// The square `(x - r, y - r, x + r, y + r)` around a point.
    pub fn around(center: Point2D, r: f64) -> Result<Self> {
        Self::new(center.x - r, center.y - r, center.x + r, center.y + r)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn y1(&self) -> f64 {
        self.y1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point2D {
        Point2D {
            x: 0.5 * (self.x0 + self.x1),
            y: 0.5 * (self.y0 + self.y1),
        }
    }

    /// Closed containment test.
    pub fn contains(&self, p: &Point2D) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn contains_box(&self, other: &BoundingBox) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    pub fn intersection(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let x0 = self.x0.max(other.x0);
        let y0 = self.y0.max(other.y0);
        let x1 = self.x1.min(other.x1);
        let y1 = self.y1.min(other.y1);
        (x0 <= x1 && y0 <= y1).then_some(BoundingBox { x0, y0, x1, y1 })
    }

    /// Integer pixel range `[c0, c1) x [r0, r1)` of pixels overlapping the box,
    /// clipped to a `width x height` raster.
    pub fn pixel_span(&self, width: usize, height: usize) -> (usize, usize, usize, usize) {
        let clip = |v: f64, hi: usize| v.max(0.0).min(hi as f64) as usize;
        let c0 = clip(self.x0.floor(), width);
        let r0 = clip(self.y0.floor(), height);
        let c1 = clip(self.x1.ceil(), width);
        let r1 = clip(self.y1.ceil(), height);
        (c0, r0, c1.max(c0), r1.max(r0))
    }
}

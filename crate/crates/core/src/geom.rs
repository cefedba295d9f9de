//! Planar points and axis-aligned rectangles.

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }
}

impl core::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl core::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

/// Closed axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect::new(0.0, 1.0, 0.0, 1.0);

    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn is_valid(&self) -> bool {
        self.x0.is_finite()
            && self.x1.is_finite()
            && self.y0.is_finite()
            && self.y1.is_finite()
            && self.x1 > self.x0
            && self.y1 > self.y0
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

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    /// Euclidean distance from `p` to the rectangle (0 inside).
    pub fn dist(&self, p: Point2) -> f64 {
        let dx = (self.x0 - p.x).max(0.0).max(p.x - self.x1);
        let dy = (self.y0 - p.y).max(0.0).max(p.y - self.y1);
        math::hypot(dx, dy)
    }

    /// Distance from an interior point to the rectangle boundary.
    pub fn dist_to_boundary(&self, p: Point2) -> f64 {
        (p.x - self.x0)
            .min(self.x1 - p.x)
            .min(p.y - self.y0)
            .min(self.y1 - p.y)
    }

    /// Smallest distance between this rectangle (assumed inside `outer`) and
    /// the boundary of `outer`.
    pub fn gap_to_boundary_of(&self, outer: &Rect) -> f64 {
        (self.x0 - outer.x0)
            .min(outer.x1 - self.x1)
            .min(self.y0 - outer.y0)
            .min(outer.y1 - self.y1)
    }

    pub fn is_inside(&self, outer: &Rect) -> bool {
        self.x0 >= outer.x0 && self.x1 <= outer.x1 && self.y0 >= outer.y0 && self.y1 <= outer.y1
    }
}

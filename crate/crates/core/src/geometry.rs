//! Planar vectors and angle helpers shared by every model.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or displacement in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

/// Positions are plain vectors; the frame they live in is implied by context.
pub type Position2 = Vec2;

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `angle` radians from the +x axis.
    pub fn from_angle(angle: f64) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Angle of the vector from the +x axis, in `(-π, π]`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    if (-PI..PI).contains(&angle) {
        return angle;
    }
    let wrapped = (angle + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to TAU for inputs just below a multiple of 2π.
    if wrapped >= PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Half-open arc of directions `[start, start + width)`, measured CCW.
/// `width` lies in `(0, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularInterval {
    pub start: f64,
    pub width: f64,
}

impl AngularInterval {
    pub fn new(start: f64, width: f64) -> Self {
        Self {
            start: wrap_angle(start),
            width: width.clamp(0.0, TAU),
        }
    }

    /// Interval running CCW from `start` to `end`. Equal endpoints give the
    /// full circle.
    pub fn between(start: f64, end: f64) -> Self {
        let width = (end - start).rem_euclid(TAU);
        Self::new(start, if width == 0.0 { TAU } else { width })
    }

    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    pub fn midpoint(&self) -> f64 {
        wrap_angle(self.start + 0.5 * self.width)
    }

    pub fn contains(&self, angle: f64) -> bool {
        (angle - self.start).rem_euclid(TAU) < self.width || self.width >= TAU
    }

    /// Intersection with `other`; two arcs on a circle meet in at most two
    /// pieces.
    pub fn intersect(&self, other: &AngularInterval) -> Vec<AngularInterval> {
        let offset = (other.start - self.start).rem_euclid(TAU);
        let mut pieces = Vec::with_capacity(2);
        for shift in [offset, offset - TAU] {
            let lo = shift.max(0.0);
            let hi = (shift + other.width).min(self.width);
            if hi > lo {
                pieces.push(AngularInterval::new(self.start + lo, hi - lo));
            }
        }
        pieces
    }

    pub fn overlap(&self, other: &AngularInterval) -> f64 {
        self.intersect(other).iter().map(|p| p.width).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), -PI);
        assert_eq!(wrap_angle(-PI), -PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        for k in -50..50 {
            let a = wrap_angle(k as f64 * 0.37 + 1e-3);
            assert!((-PI..PI).contains(&a));
        }
    }

    #[test]
    fn interval_intersection_wraps() {
        // [170°, 190°] against [185°, 360°]
        let a = AngularInterval::between(170f64.to_radians(), -170f64.to_radians());
        let b = AngularInterval::between(-175f64.to_radians(), 0.0);
        let o = a.overlap(&b);
        assert!((o - 5f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn interval_full_circle_overlap_is_other_width() {
        let full = AngularInterval::new(0.3, TAU);
        let b = AngularInterval::new(-2.0, 1.25);
        assert!((full.overlap(&b) - 1.25).abs() < 1e-12);
        assert!((b.overlap(&full) - 1.25).abs() < 1e-12);
    }

    #[test]
    fn disjoint_intervals() {
        let a = AngularInterval::new(0.0, 0.5);
        let b = AngularInterval::new(1.0, 0.5);
        assert!(a.intersect(&b).is_empty());
    }

    #[test]
    fn interval_two_piece_intersection() {
        // a covers [0, 300°), b covers [270°, 390°): overlap is [270,300) and [0,30).
        let a = AngularInterval::new(0.0, 300f64.to_radians());
        let b = AngularInterval::new(270f64.to_radians(), 120f64.to_radians());
        let pieces = a.intersect(&b);
        assert_eq!(pieces.len(), 2);
        assert!((a.overlap(&b) - 60f64.to_radians()).abs() < 1e-12);
    }
}

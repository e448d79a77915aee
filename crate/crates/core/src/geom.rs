//! Pixel-space geometry shared by every detector.
//!
//! Origin is the top-left pixel, `y` grows downward, and integer
//! coordinates name pixel centers.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Rounds a real to the fixed precision used in serialized output.
pub fn round3(v: f64) -> f64 {
    let r = (v * 1000.0).round() / 1000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// `serialize_with` helper for reals written at fixed precision.
pub fn ser_round3<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round3(*v))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[allow(clippy::should_implement_trait)]
impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [round3(self.x), round3(self.y)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(d)?;
        Ok(Point::new(x, y))
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BBox {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl BBox {
    pub const fn new(x0: i32, y0: i32, x1: i32, y1: i32) -> Self {
        Self { x0, y0, x1, y1 }
    }

    /// Smallest box containing every point, with reals rounded to the nearest pixel.
    pub fn around(points: &[Point]) -> Option<BBox> {
        let first = points.first()?;
        let mut b = BBox::new(
            first.x.round() as i32,
            first.y.round() as i32,
            first.x.round() as i32,
            first.y.round() as i32,
        );
        for p in &points[1..] {
            b = b.include(p.x.round() as i32, p.y.round() as i32);
        }
        Some(b)
    }

    pub fn is_valid(&self) -> bool {
        self.x0 <= self.x1 && self.y0 <= self.y1
    }

    pub fn width(&self) -> i32 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> i32 {
        self.y1 - self.y0 + 1
    }

    pub fn area(&self) -> i64 {
        if !self.is_valid() {
            return 0;
        }
        self.width() as i64 * self.height() as i64
    }

    pub fn include(self, x: i32, y: i32) -> BBox {
        BBox::new(
            self.x0.min(x),
            self.y0.min(y),
            self.x1.max(x),
            self.y1.max(y),
        )
    }

    pub fn union(self, o: BBox) -> BBox {
        BBox::new(
            self.x0.min(o.x0),
            self.y0.min(o.y0),
            self.x1.max(o.x1),
            self.y1.max(o.y1),
        )
    }

    pub fn intersect(self, o: BBox) -> Option<BBox> {
        let b = BBox::new(
            self.x0.max(o.x0),
            self.y0.max(o.y0),
            self.x1.min(o.x1),
            self.y1.min(o.y1),
        );
        b.is_valid().then_some(b)
    }

    pub fn iou(&self, o: &BBox) -> f64 {
        let inter = self.intersect(*o).map_or(0, |b| b.area());
        let union = self.area() + o.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }

    pub fn expand(self, d: i32) -> BBox {
        BBox::new(self.x0 - d, self.y0 - d, self.x1 + d, self.y1 + d)
    }

    /// Clip to an image of the given size; `None` when nothing remains.
    pub fn clip(self, width: usize, height: usize) -> Option<BBox> {
        self.intersect(BBox::new(0, 0, width as i32 - 1, height as i32 - 1))
    }

    pub fn contains(&self, x: i32, y: i32) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn within(&self, width: usize, height: usize) -> bool {
        self.is_valid()
            && self.x0 >= 0
            && self.y0 >= 0
            && (self.x1 as i64) < width as i64
            && (self.y1 as i64) < height as i64
    }

    pub fn center(&self) -> Point {
        Point::new(
            (self.x0 + self.x1) as f64 / 2.0,
            (self.y0 + self.y1) as f64 / 2.0,
        )
    }

    pub fn corners(&self) -> [Point; 4] {
        let (x0, y0, x1, y1) = (
            self.x0 as f64,
            self.y0 as f64,
            self.x1 as f64,
            self.y1 as f64,
        );
        [
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ]
    }

    /// Euclidean distance from a point to the box (0 inside).
    pub fn dist_to_point(&self, p: Point) -> f64 {
        let dx = (self.x0 as f64 - p.x).max(0.0).max(p.x - self.x1 as f64);
        let dy = (self.y0 as f64 - p.y).max(0.0).max(p.y - self.y1 as f64);
        dx.hypot(dy)
    }

    pub fn to_array(self) -> [i32; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }
}

impl Serialize for BBox {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BBox {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x0, y0, x1, y1] = <[i32; 4]>::deserialize(d)?;
        Ok(BBox::new(x0, y0, x1, y1))
    }
}

/// Closest point to `p` on the finite segment `a`–`b`.
pub fn closest_on_segment(p: Point, a: Point, b: Point) -> Point {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return a;
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    a.add(ab.scale(t))
}

pub fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    p.dist(closest_on_segment(p, a, b))
}

/// Perpendicular distance from `p` to the infinite line through `a` and `b`.
pub fn point_line_dist(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len = ab.norm();
    if len == 0.0 {
        return p.dist(a);
    }
    (ab.cross(p.sub(a))).abs() / len
}

/// Shortest distance between two finite segments.
pub fn segment_segment_dist(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let crosses = line_intersection(a, b, c, d)
        .is_some_and(|(_, s, t)| (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t));
    if crosses {
        return 0.0;
    }
    point_segment_dist(a, c, d)
        .min(point_segment_dist(b, c, d))
        .min(point_segment_dist(c, a, b))
        .min(point_segment_dist(d, a, b))
}

/// Solves `a + s(b-a) = c + t(d-c)`; `None` for (near-)parallel lines.
pub fn line_intersection(a: Point, b: Point, c: Point, d: Point) -> Option<(Point, f64, f64)> {
    let r = b.sub(a);
    let q = d.sub(c);
    let denom = r.cross(q);
    let scale = r.norm() * q.norm();
    if scale == 0.0 || denom.abs() <= 1e-9 * scale {
        return None;
    }
    let ac = c.sub(a);
    let s = ac.cross(q) / denom;
    let t = ac.cross(r) / denom;
    Some((a.add(r.scale(s)), s, t))
}

/// Distance from a segment to an axis-aligned box (0 when they touch).
pub fn segment_box_dist(a: Point, b: Point, bbox: &BBox) -> f64 {
    if bbox.dist_to_point(a) == 0.0 || bbox.dist_to_point(b) == 0.0 {
        return 0.0;
    }
    let c = bbox.corners();
    (0..4)
        .map(|i| segment_segment_dist(a, b, c[i], c[(i + 1) % 4]))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou_of_identical_and_disjoint() {
        let a = BBox::new(0, 0, 9, 9);
        assert_eq!(a.iou(&a), 1.0);
        assert_eq!(a.iou(&BBox::new(20, 20, 30, 30)), 0.0);
        // 10x10 and 10x10 sharing a 5x10 half
        let b = BBox::new(5, 0, 14, 9);
        assert!((a.iou(&b) - 50.0 / 150.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_diagonals() {
        let (p, s, t) = line_intersection(
            Point::new(0.0, 0.0),
            Point::new(10.0, 10.0),
            Point::new(0.0, 10.0),
            Point::new(10.0, 0.0),
        )
        .unwrap();
        assert_eq!(p, Point::new(5.0, 5.0));
        assert_eq!((s, t), (0.5, 0.5));
    }

    #[test]
    fn segment_box_distance() {
        let b = BBox::new(10, 10, 20, 20);
        let d = segment_box_dist(Point::new(0.0, 30.0), Point::new(40.0, 30.0), &b);
        assert!((d - 10.0).abs() < 1e-12);
        let through = segment_box_dist(Point::new(0.0, 15.0), Point::new(40.0, 15.0), &b);
        assert_eq!(through, 0.0);
    }

    #[test]
    fn rounding_is_stable() {
        assert_eq!(round3(1.23456), 1.235);
        assert_eq!(round3(-0.0001), 0.0);
    }
}

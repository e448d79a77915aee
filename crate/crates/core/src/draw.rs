//! Rasterization primitives onto binary canvases. Pixels are tested at their
//! centers and everything is clipped to the canvas.

use crate::geom::{point_segment_dist, BBox, Point};
use crate::raster::BinaryImage;

fn clipped(img: &BinaryImage, b: BBox) -> Option<BBox> {
    b.clip(img.width(), img.height())
}

fn paint(img: &mut BinaryImage, b: BBox, on: impl Fn(Point) -> bool) {
    let Some(b) = clipped(img, b) else { return };
    for y in b.y0..=b.y1 {
        for x in b.x0..=b.x1 {
            if on(Point::new(x as f64, y as f64)) {
                img.set(x as usize, y as usize, true);
            }
        }
    }
}

fn hull(points: &[Point], pad: f64) -> BBox {
    let mut b = BBox::around(points).unwrap_or_default();
    let p = pad.ceil() as i32 + 1;
    b = b.expand(p);
    b
}

/// Inclusive axis-aligned rectangle.
pub fn fill_rect(img: &mut BinaryImage, b: BBox) {
    paint(img, b, |_| true);
}

/// Round-capped stroke: pixels within `radius` of the segment.
pub fn stroke(img: &mut BinaryImage, a: Point, b: Point, radius: f64) {
    paint(img, hull(&[a, b], radius), |p| {
        point_segment_dist(p, a, b) <= radius
    });
}

pub fn inside_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x) {
            inside = !inside;
        }
    }
    inside
}

fn edge_dist(p: Point, poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| point_segment_dist(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Solid polygon, edges included.
pub fn fill_polygon(img: &mut BinaryImage, poly: &[Point]) {
    paint(img, hull(poly, 1.0), |p| {
        inside_polygon(p, poly) || edge_dist(p, poly) < 0.5
    });
}

/// Polygon outline of thickness `t` grown inward from the edges.
pub fn outline_polygon(img: &mut BinaryImage, poly: &[Point], t: f64) {
    paint(img, hull(poly, 1.0), |p| {
        let d = edge_dist(p, poly);
        (inside_polygon(p, poly) && d < t) || d < 0.5
    });
}

pub fn disk(img: &mut BinaryImage, c: Point, r: f64) {
    paint(img, hull(&[c], r), |p| p.dist(c) <= r);
}

/// Ring of radius `r` and half-thickness `half`.
pub fn ring(img: &mut BinaryImage, c: Point, r: f64, half: f64) {
    paint(img, hull(&[c], r + half), |p| (p.dist(c) - r).abs() <= half);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizontal_stroke_on_half_rows_is_two_pixels() {
        let mut img = BinaryImage::new(20, 10).unwrap();
        stroke(&mut img, Point::new(2.0, 4.5), Point::new(17.0, 4.5), 0.75);
        for x in 2..=17 {
            assert!(img.get(x, 4) && img.get(x, 5));
            assert!(!img.get(x, 3) && !img.get(x, 6));
        }
    }

    #[test]
    fn filled_square_polygon() {
        let mut img = BinaryImage::new(20, 20).unwrap();
        let sq = [
            Point::new(5.0, 5.0),
            Point::new(14.0, 5.0),
            Point::new(14.0, 14.0),
            Point::new(5.0, 14.0),
        ];
        fill_polygon(&mut img, &sq);
        assert_eq!(img.count(), 100);
        let mut o = BinaryImage::new(20, 20).unwrap();
        outline_polygon(&mut o, &sq, 2.0);
        assert_eq!(o.count(), 100 - 36);
    }

    #[test]
    fn clipping_is_silent() {
        let mut img = BinaryImage::new(5, 5).unwrap();
        disk(&mut img, Point::new(-10.0, -10.0), 3.0);
        assert!(img.is_empty());
        fill_rect(&mut img, BBox::new(3, 3, 40, 40));
        assert_eq!(img.count(), 4);
    }
}

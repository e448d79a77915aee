//! Color inspection overlay of a result drawn over its source sheet.

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::geom::{point_segment_dist, BBox, Point};
use crate::raster::GrayImage;
use crate::result::PidGraph;
use crate::tags::TagKind;

pub const CODE_COLOR: [u8; 3] = [0, 90, 255];
pub const OUTLET_COLOR: [u8; 3] = [220, 0, 0];
pub const INLET_COLOR: [u8; 3] = [0, 170, 0];
pub const SYMBOL_COLOR: [u8; 3] = [255, 140, 0];
pub const SEGMENT_COLOR: [u8; 3] = [200, 0, 200];
pub const JUNCTION_COLOR: [u8; 3] = [0, 190, 190];
pub const INVALID_JUNCTION_COLOR: [u8; 3] = [128, 128, 128];

fn put(img: &mut RgbImage, x: i32, y: i32, c: [u8; 3]) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, Rgb(c));
    }
}

fn outline(img: &mut RgbImage, b: BBox, c: [u8; 3]) {
    for x in b.x0..=b.x1 {
        put(img, x, b.y0, c);
        put(img, x, b.y1, c);
    }
    for y in b.y0..=b.y1 {
        put(img, b.x0, y, c);
        put(img, b.x1, y, c);
    }
}

fn line(img: &mut RgbImage, a: Point, b: Point, c: [u8; 3]) {
    let Some(bb) = BBox::around(&[a, b]) else {
        return;
    };
    for y in bb.y0 - 1..=bb.y1 + 1 {
        for x in bb.x0 - 1..=bb.x1 + 1 {
            if point_segment_dist(Point::new(x as f64, y as f64), a, b) <= 0.5 {
                put(img, x, y, c);
            }
        }
    }
}

/// Draws every component of `graph` over `image`. The output has the input's
/// dimensions, and an empty result yields a plain gray-to-color copy.
pub fn render_overlay(image: &GrayImage, graph: &PidGraph) -> Result<RgbImage> {
    let dims = (image.width(), image.height());
    let expected = (graph.image.width, graph.image.height);
    if dims != expected {
        return Err(Error::DimensionMismatch {
            image: dims,
            result: expected,
        });
    }
    let mut out = RgbImage::from_fn(dims.0 as u32, dims.1 as u32, |x, y| {
        let v = image.get(x as usize, y as usize);
        Rgb([v, v, v])
    });
    for s in &graph.segments {
        line(&mut out, s.p, s.q, SEGMENT_COLOR);
    }
    for c in &graph.codes {
        outline(&mut out, c.item.bbox, CODE_COLOR);
    }
    for t in &graph.tags {
        let color = match t.item.kind {
            TagKind::Outlet => OUTLET_COLOR,
            TagKind::Inlet => INLET_COLOR,
        };
        outline(&mut out, t.item.bbox, color);
    }
    for s in &graph.symbols {
        outline(&mut out, s.item.bbox, SYMBOL_COLOR);
    }
    for j in &graph.junctions {
        let (x, y) = (j.item.at.x.round() as i32, j.item.at.y.round() as i32);
        let color = if j.item.valid {
            JUNCTION_COLOR
        } else {
            INVALID_JUNCTION_COLOR
        };
        outline(&mut out, BBox::new(x - 3, y - 3, x + 3, y + 3), color);
    }
    Ok(out)
}

pub fn save_overlay(overlay: &RgbImage, path: impl AsRef<std::path::Path>) -> Result<()> {
    let path = path.as_ref();
    overlay.save(path).map_err(|source| Error::ImageWrite {
        path: path.to_path_buf(),
        source,
    })
}

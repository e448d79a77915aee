//! Sheet ingestion and binary morphology.
//!
//! Everything downstream works on [`BinaryImage`], where `true` marks dark
//! ink. Components use 8-connectivity throughout.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::BBox;

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    luma: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, luma: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || luma.len() != width * height {
            return Err(Error::Dimension { width, height });
        }
        Ok(Self {
            width,
            height,
            luma,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn luma(&self) -> &[u8] {
        &self.luma
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.luma[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.luma[y * self.width + x] = v;
    }

    /// Loads PNG or JPEG and converts to luma with `round(0.299R + 0.587G + 0.114B)`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|source| Error::ImageRead {
            path: path.to_path_buf(),
            source,
        })?;
        let rgb = img.to_rgb8();
        Self::from_rgb(rgb.width() as usize, rgb.height() as usize, rgb.as_raw())
    }

    pub fn from_rgb(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::Dimension { width, height });
        }
        let luma = rgb
            .chunks_exact(3)
            .map(|px| luma_of(px[0], px[1], px[2]))
            .collect();
        Self::new(width, height, luma)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        image::GrayImage::from_raw(self.width as u32, self.height as u32, self.luma.clone())
            .expect("buffer length checked on construction")
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(|source| Error::ImageWrite {
                path: path.to_path_buf(),
                source,
            })
    }
}

/// Integer rounding of the BT.601 luma weights.
pub fn luma_of(r: u8, g: u8, b: u8) -> u8 {
    // 0.299, 0.587, 0.114 scaled by 1000 keeps the rounding exact.
    let v = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((v + 500) / 1000) as u8
}

/// Foreground mask, row-major; `true` is ink.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    ink: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension { width, height });
        }
        Ok(Self {
            width,
            height,
            ink: vec![false; width * height],
        })
    }

    pub fn from_vec(width: usize, height: usize, ink: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || ink.len() != width * height {
            return Err(Error::Dimension { width, height });
        }
        Ok(Self { width, height, ink })
    }

    /// Parses rows of `#`/`1` (ink) and anything else (background). Test helper.
    pub fn from_rows(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut img = Self::new(width, height)?;
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.chars().enumerate().take(width) {
                img.set(x, y, c == '#' || c == '1');
            }
        }
        Ok(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn ink(&self) -> &[bool] {
        &self.ink
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.ink[y * self.width + x]
    }

    /// Out-of-bounds reads are background.
    pub fn at(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.ink[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.ink[y * self.width + x] = v;
    }

    /// Out-of-bounds writes are ignored.
    pub fn put(&mut self, x: i64, y: i64, v: bool) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.ink[y as usize * self.width + x as usize] = v;
        }
    }

    pub fn count(&self) -> usize {
        self.ink.iter().filter(|&&b| b).count()
    }

    pub fn count_in(&self, bbox: &BBox) -> usize {
        let Some(b) = bbox.clip(self.width, self.height) else {
            return 0;
        };
        (b.y0..=b.y1)
            .map(|y| {
                (b.x0..=b.x1)
                    .filter(|&x| self.get(x as usize, y as usize))
                    .count()
            })
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        !self.ink.iter().any(|&b| b)
    }

    /// Ink as luma 0, background as 255.
    pub fn to_gray(&self) -> GrayImage {
        let luma = self.ink.iter().map(|&b| if b { 0 } else { 255 }).collect();
        GrayImage::new(self.width, self.height, luma).expect("same dimensions")
    }

    pub fn and(&self, other: &BinaryImage) -> BinaryImage {
        self.zip(other, |a, b| a && b)
    }

    pub fn and_not(&self, other: &BinaryImage) -> BinaryImage {
        self.zip(other, |a, b| a && !b)
    }

    pub fn or(&self, other: &BinaryImage) -> BinaryImage {
        self.zip(other, |a, b| a || b)
    }

    fn zip(&self, other: &BinaryImage, f: impl Fn(bool, bool) -> bool) -> BinaryImage {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let ink = self
            .ink
            .iter()
            .zip(&other.ink)
            .map(|(&a, &b)| f(a, b))
            .collect();
        BinaryImage {
            width: self.width,
            height: self.height,
            ink,
        }
    }
}

/// Global threshold maximizing inter-class variance over an exhaustive sweep.
///
/// Pixels with luma strictly below the returned value are ink. When several
/// thresholds tie, the middle of the optimal plateau is returned. A
/// single-level image has no split, so it is judged against mid-gray.
pub fn otsu_threshold(image: &GrayImage) -> u16 {
    let mut hist = [0u64; 256];
    for &v in image.luma() {
        hist[v as usize] += 1;
    }
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return 128;
    }
    let total = image.luma().len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as f64 * c as f64)
        .sum();

    let mut best = f64::NEG_INFINITY;
    let (mut lo, mut hi) = (0u16, 0u16);
    let (mut w_bg, mut sum_bg) = (0.0f64, 0.0f64);
    // threshold t: class 0 = luma < t
    for t in 1..=255u16 {
        w_bg += hist[t as usize - 1] as f64;
        sum_bg += (t as f64 - 1.0) * hist[t as usize - 1] as f64;
        let w_fg = total - w_bg;
        if w_bg == 0.0 || w_fg == 0.0 {
            continue;
        }
        let m0 = sum_bg / w_bg;
        let m1 = (sum_all - sum_bg) / w_fg;
        let between = w_bg * w_fg * (m0 - m1) * (m0 - m1);
        if between > best * (1.0 + 1e-12) {
            best = between;
            lo = t;
            hi = t;
        } else if (between - best).abs() <= best * 1e-12 {
            hi = t;
        }
    }
    (lo + hi).div_ceil(2)
}

pub fn binarize(image: &GrayImage) -> BinaryImage {
    let t = otsu_threshold(image);
    let ink = image.luma().iter().map(|&v| (v as u16) < t).collect();
    BinaryImage::from_vec(image.width(), image.height(), ink).expect("same dimensions")
}

const NEIGHBORS8: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

/// Ink flags of the 8 neighbors, clockwise from north (P2..P9).
fn ring(img: &BinaryImage, x: i64, y: i64) -> [bool; 8] {
    NEIGHBORS8.map(|(dx, dy)| img.at(x + dx, y + dy))
}

/// Zhang-Suen thinning followed by a pass that removes leftover 2x2 blocks.
///
/// Components that thinning would erase completely (isolated 2x2 blocks)
/// keep one pixel so the component count is unchanged.
pub fn skeletonize(image: &BinaryImage) -> BinaryImage {
    let mut img = image.clone();
    let mut active: Vec<(i64, i64)> = ink_points(&img);

    loop {
        let mut changed = false;
        for step in 0..2 {
            let doomed: Vec<(i64, i64)> = active
                .iter()
                .copied()
                .filter(|&(x, y)| img.at(x, y) && zhang_suen_deletable(&img, x, y, step))
                .collect();
            for &(x, y) in &doomed {
                img.put(x, y, false);
            }
            changed |= !doomed.is_empty();
        }
        if !changed {
            break;
        }
        active.retain(|&(x, y)| img.at(x, y));
    }

    remove_square_blocks(&mut img);
    extend_endpoints(image, &mut img);
    restore_lost_components(image, &mut img);
    img
}

/// Thinning eats into stroke ends; walk each skeleton endpoint back out along
/// its own direction while the original stroke continues.
fn extend_endpoints(original: &BinaryImage, skel: &mut BinaryImage) {
    let tips: Vec<(i64, i64, i64, i64)> = ink_points(skel)
        .into_iter()
        .filter_map(|(x, y)| {
            let n = ring(skel, x, y);
            if n.iter().filter(|&&v| v).count() != 1 {
                return None;
            }
            let k = n.iter().position(|&v| v)?;
            let (dx, dy) = NEIGHBORS8[k];
            Some((x, y, -dx, -dy))
        })
        .collect();
    for (mut x, mut y, dx, dy) in tips {
        loop {
            let (nx, ny) = (x + dx, y + dy);
            if !original.at(nx, ny) || skel.at(nx, ny) {
                break;
            }
            let crowded = NEIGHBORS8
                .iter()
                .any(|&(ox, oy)| (nx + ox, ny + oy) != (x, y) && skel.at(nx + ox, ny + oy));
            if crowded {
                break;
            }
            skel.put(nx, ny, true);
            x = nx;
            y = ny;
        }
    }
}

fn ink_points(img: &BinaryImage) -> Vec<(i64, i64)> {
    let mut pts = Vec::new();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) {
                pts.push((x as i64, y as i64));
            }
        }
    }
    pts
}

fn zhang_suen_deletable(img: &BinaryImage, x: i64, y: i64, step: usize) -> bool {
    let n = ring(img, x, y);
    let b = n.iter().filter(|&&v| v).count();
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count();
    if a != 1 {
        return false;
    }
    // indices: 0=P2(N) 2=P4(E) 4=P6(S) 6=P8(W)
    if step == 0 {
        !(n[0] && n[2] && n[4]) && !(n[2] && n[4] && n[6])
    } else {
        !(n[0] && n[2] && n[6]) && !(n[0] && n[4] && n[6])
    }
}

/// Yokoi 8-connectivity number equals 1: removing the pixel keeps the
/// local topology intact.
fn is_simple(img: &BinaryImage, x: i64, y: i64) -> bool {
    // order: E, NE, N, NW, W, SW, S, SE
    const ORDER: [(i64, i64); 8] = [
        (1, 0),
        (1, -1),
        (0, -1),
        (-1, -1),
        (-1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
    ];
    let c: Vec<bool> = ORDER
        .iter()
        .map(|&(dx, dy)| !img.at(x + dx, y + dy))
        .collect();
    let neighbors = c.iter().filter(|&&v| !v).count();
    if neighbors < 2 {
        return false;
    }
    let yokoi: i32 = [0usize, 2, 4, 6]
        .iter()
        .map(|&k| c[k] as i32 - (c[k] && c[(k + 1) % 8] && c[(k + 2) % 8]) as i32)
        .sum();
    yokoi == 1
}

fn remove_square_blocks(img: &mut BinaryImage) {
    loop {
        let mut removed = false;
        for y in 0..img.height().saturating_sub(1) as i64 {
            for x in 0..img.width().saturating_sub(1) as i64 {
                let block = [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)];
                if !block.iter().all(|&(bx, by)| img.at(bx, by)) {
                    continue;
                }
                if let Some(&(bx, by)) = block.iter().find(|&&(bx, by)| is_simple(img, bx, by)) {
                    img.put(bx, by, false);
                    removed = true;
                }
            }
        }
        if !removed {
            break;
        }
    }
}

fn restore_lost_components(original: &BinaryImage, thinned: &mut BinaryImage) {
    let (labels, comps) = label(original);
    let mut alive = vec![false; comps.len()];
    for (i, &l) in labels.iter().enumerate() {
        if l > 0 && thinned.ink[i] {
            alive[l as usize - 1] = true;
        }
    }
    for (i, &l) in labels.iter().enumerate() {
        if l > 0 && !alive[l as usize - 1] {
            thinned.ink[i] = true;
            alive[l as usize - 1] = true;
        }
    }
}

/// Sets every pixel inside any box to background; boxes are clipped.
pub fn erase_regions(image: &BinaryImage, boxes: &[BBox]) -> BinaryImage {
    let mut out = image.clone();
    for b in boxes {
        let Some(b) = b.clip(image.width(), image.height()) else {
            continue;
        };
        for y in b.y0..=b.y1 {
            let row = y as usize * out.width;
            out.ink[row + b.x0 as usize..=row + b.x1 as usize].fill(false);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub id: usize,
    pub pixel_count: usize,
    pub bbox: BBox,
}

/// Labels ink with 8-connectivity. Labels are 1-based in raster order of
/// each component's first pixel; 0 is background.
pub fn label(image: &BinaryImage) -> (Vec<u32>, Vec<Component>) {
    label_with(image, true, &NEIGHBORS8)
}

/// Labels background with 4-connectivity (the dual of 8-connected ink).
pub fn label_background(image: &BinaryImage) -> (Vec<u32>, Vec<Component>) {
    label_with(image, false, &[(0, -1), (1, 0), (0, 1), (-1, 0)])
}

fn label_with(image: &BinaryImage, value: bool, nbrs: &[(i64, i64)]) -> (Vec<u32>, Vec<Component>) {
    let (w, h) = (image.width(), image.height());
    let mut labels = vec![0u32; w * h];
    let mut comps = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if image.ink[start] != value || labels[start] != 0 {
            continue;
        }
        let id = comps.len() + 1;
        let (sx, sy) = ((start % w) as i32, (start / w) as i32);
        let mut bbox = BBox::new(sx, sy, sx, sy);
        let mut count = 0;
        labels[start] = id as u32;
        stack.push(start);
        while let Some(i) = stack.pop() {
            count += 1;
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            bbox = bbox.include(x as i32, y as i32);
            for &(dx, dy) in nbrs {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if image.ink[j] == value && labels[j] == 0 {
                    labels[j] = id as u32;
                    stack.push(j);
                }
            }
        }
        comps.push(Component {
            id,
            pixel_count: count,
            bbox,
        });
    }
    (labels, comps)
}

pub fn connected_components(image: &BinaryImage) -> Vec<Component> {
    label(image).1
}

fn check_kernel(side: usize) -> Result<i64> {
    if side == 0 || side.is_multiple_of(2) {
        return Err(Error::param(
            "kernel-side",
            format!("{side} is not a positive odd size"),
        ));
    }
    Ok((side / 2) as i64)
}

/// Minkowski sum with a `side`×`side` square (separable max filter).
pub fn dilate(image: &BinaryImage, side: usize) -> Result<BinaryImage> {
    let r = check_kernel(side)?;
    Ok(square_filter(image, r, true))
}

/// Erosion by a `side`×`side` square; pixels outside the image count as background.
pub fn erode(image: &BinaryImage, side: usize) -> Result<BinaryImage> {
    let r = check_kernel(side)?;
    Ok(square_filter(image, r, false))
}

fn square_filter(image: &BinaryImage, r: i64, grow: bool) -> BinaryImage {
    if r == 0 {
        return image.clone();
    }
    let (w, h) = (image.width() as i64, image.height() as i64);
    let pass = |src: &BinaryImage, horizontal: bool| -> BinaryImage {
        let mut out = src.clone();
        for y in 0..h {
            for x in 0..w {
                let hits = (-r..=r).map(|d| {
                    if horizontal {
                        src.at(x + d, y)
                    } else {
                        src.at(x, y + d)
                    }
                });
                let v = if grow {
                    hits.into_iter().any(|b| b)
                } else {
                    hits.into_iter().all(|b| b)
                };
                out.ink[(y * w + x) as usize] = v;
            }
        }
        out
    };
    let tmp = pass(image, true);
    pass(&tmp, false)
}

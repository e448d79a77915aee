use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SymbolClass, SymbolDetection};
use crate::draw;
use crate::error::{Error, Result};
use crate::geom::{BBox, Point};
use crate::raster::{BinaryImage, GrayImage};

/// Side of every built-in template; the pipe runs through rows 12 and 13.
pub const TEMPLATE_SIZE: usize = 26;
const MAX_TEMPLATE_WIDTH: usize = 64;
const NMS_IOU: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rotation {
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270];

    pub fn degrees(self) -> u16 {
        self.quarter_turns() as u16 * 90
    }

    pub fn quarter_turns(self) -> u8 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 1,
            Rotation::R180 => 2,
            Rotation::R270 => 3,
        }
    }

    pub fn from_degrees(d: u16) -> Option<Rotation> {
        Self::ALL.into_iter().find(|r| r.degrees() == d)
    }
}

impl Serialize for Rotation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u16(self.degrees())
    }
}

impl<'de> Deserialize<'de> for Rotation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let deg = u16::deserialize(d)?;
        Rotation::from_degrees(deg).ok_or_else(|| {
            serde::de::Error::custom(format!("rotation {deg} is not a multiple of 90 below 360"))
        })
    }
}

/// Rotates a binary mask clockwise by a number of quarter turns.
pub fn rotate_mask(mask: &BinaryImage, rotation: Rotation) -> BinaryImage {
    let (w, h) = (mask.width(), mask.height());
    let turns = rotation.quarter_turns();
    let (nw, nh) = if turns % 2 == 1 { (h, w) } else { (w, h) };
    let mut out = BinaryImage::new(nw, nh).expect("non-empty mask");
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            let (nx, ny) = match turns {
                0 => (x, y),
                1 => (h - 1 - y, x),
                2 => (w - 1 - x, h - 1 - y),
                _ => (y, w - 1 - x),
            };
            out.set(nx, ny, true);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTemplate {
    pub class: SymbolClass,
    mask: BinaryImage,
    rotations: Vec<Rotation>,
}

impl SymbolTemplate {
    pub fn new(class: SymbolClass, mask: BinaryImage, rotations: &[Rotation]) -> Result<Self> {
        if mask.is_empty() {
            return Err(Error::param(
                "template mask",
                format!("{class} mask has no ink"),
            ));
        }
        if mask.width().max(mask.height()) > MAX_TEMPLATE_WIDTH {
            return Err(Error::param(
                "template mask",
                format!("{class} mask exceeds {MAX_TEMPLATE_WIDTH} px"),
            ));
        }
        let mut rotations = rotations.to_vec();
        rotations.sort();
        rotations.dedup();
        if rotations.is_empty() {
            rotations.push(Rotation::R0);
        }
        Ok(Self {
            class,
            mask,
            rotations,
        })
    }

    pub fn mask(&self) -> &BinaryImage {
        &self.mask
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    /// Distinct rotated masks.
    pub fn variants(&self) -> Vec<BinaryImage> {
        let mut out: Vec<BinaryImage> = Vec::new();
        for &r in &self.rotations {
            let m = rotate_mask(&self.mask, r);
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out
    }
}

fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

const C: f64 = 12.5;
const STROKE: f64 = 0.75;

fn bowtie() -> [[Point; 3]; 2] {
    [
        [pt(3.0, 2.0), pt(C, C), pt(3.0, 23.0)],
        [pt(22.0, 2.0), pt(C, C), pt(22.0, 23.0)],
    ]
}

/// Draws a class glyph, including its pipe stub, into a fresh 26×26 mask.
pub fn render_symbol(class: SymbolClass) -> BinaryImage {
    let mut m = BinaryImage::new(TEMPLATE_SIZE, TEMPLATE_SIZE).expect("fixed size");
    let last = (TEMPLATE_SIZE - 1) as i32;
    draw::fill_rect(&mut m, BBox::new(0, 12, last, 13));
    let outline_bowtie = |m: &mut BinaryImage| {
        for tri in bowtie() {
            draw::outline_polygon(m, &tri, 1.5);
        }
    };
    match class {
        SymbolClass::BallValve => {
            outline_bowtie(&mut m);
            draw::disk(&mut m, pt(C, C), 3.5);
        }
        SymbolClass::GlobeValve => {
            draw::ring(&mut m, pt(C, C), 6.0, 1.0);
            draw::stroke(&mut m, pt(C, C), pt(C, 1.5), STROKE);
            draw::stroke(&mut m, pt(7.0, 1.5), pt(18.0, 1.5), STROKE);
        }
        SymbolClass::GateValveNc => {
            for tri in bowtie() {
                draw::fill_polygon(&mut m, &tri);
            }
            draw::stroke(&mut m, pt(C, 0.5), pt(C, 24.5), STROKE);
        }
        SymbolClass::GlobeValveNc => draw::disk(&mut m, pt(C, C), 6.0),
        SymbolClass::CircleValve => draw::ring(&mut m, pt(C, C), 9.0, 1.0),
        SymbolClass::Concentric => draw::outline_polygon(
            &mut m,
            &[pt(4.0, 3.0), pt(21.0, 8.0), pt(21.0, 17.0), pt(4.0, 22.0)],
            2.0,
        ),
        SymbolClass::FloodConnection => {
            draw::stroke(&mut m, pt(10.5, 3.0), pt(10.5, 22.0), STROKE);
            draw::stroke(&mut m, pt(15.5, 3.0), pt(15.5, 22.0), STROKE);
        }
        SymbolClass::ChemicalSeal => draw::outline_polygon(
            &mut m,
            &[pt(C, 2.0), pt(23.0, C), pt(C, 23.0), pt(2.0, C)],
            2.0,
        ),
        SymbolClass::CheckValve => {
            draw::outline_polygon(
                &mut m,
                &[pt(3.0, 5.0), pt(22.0, 5.0), pt(22.0, 20.0), pt(3.0, 20.0)],
                2.0,
            );
            draw::stroke(&mut m, pt(3.0, 20.0), pt(22.0, 5.0), STROKE);
        }
        SymbolClass::Insulation => {
            for x in [5.0, 10.0, 15.0] {
                draw::stroke(&mut m, pt(x, 22.0), pt(x + 6.0, 3.0), STROKE);
            }
        }
        SymbolClass::Others => draw::outline_polygon(
            &mut m,
            &[pt(7.0, 7.0), pt(18.0, 7.0), pt(18.0, 18.0), pt(7.0, 18.0)],
            2.0,
        ),
    }
    m
}

/// One template per class with every quarter-turn rotation.
pub fn builtin_library() -> Vec<SymbolTemplate> {
    SymbolClass::ALL
        .into_iter()
        .map(|c| {
            SymbolTemplate::new(c, render_symbol(c), &Rotation::ALL)
                .expect("built-in glyphs have ink")
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    schema: String,
    templates: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    file: String,
    class: SymbolClass,
    rotations: Vec<Rotation>,
}

const MANIFEST_SCHEMA: &str = "pid-graph-templates/1";

/// Writes `<label>_<n>.png` masks and `manifest.json` into `dir`.
pub fn save_library(dir: impl AsRef<Path>, library: &[SymbolTemplate]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut counters: BTreeMap<SymbolClass, usize> = BTreeMap::new();
    let mut entries = Vec::with_capacity(library.len());
    for t in library {
        let n = counters.entry(t.class).or_default();
        let file = format!("{}_{}.png", t.class.label(), n);
        *n += 1;
        t.mask.to_gray().save_png(dir.join(&file))?;
        entries.push(ManifestEntry {
            file,
            class: t.class,
            rotations: t.rotations.clone(),
        });
    }
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA.into(),
        templates: entries,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
}

pub fn load_library(dir: impl AsRef<Path>) -> Result<Vec<SymbolTemplate>> {
    let dir = dir.as_ref();
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::schema(path.display().to_string(), &e))?;
    if manifest.templates.is_empty() {
        return Err(Error::param(
            "template library",
            "manifest lists no templates",
        ));
    }
    manifest
        .templates
        .into_iter()
        .enumerate()
        .map(|(index, entry)| {
            let gray = GrayImage::load(dir.join(&entry.file))?;
            let ink = gray.luma().iter().map(|&v| v < 128).collect();
            let mask = BinaryImage::from_vec(gray.width(), gray.height(), ink)?;
            SymbolTemplate::new(entry.class, mask, &entry.rotations).map_err(|e| {
                Error::Validation {
                    context: path.display().to_string(),
                    index,
                    message: e.to_string(),
                }
            })
        })
        .collect()
}

/// Row-packed bits with one spare word so any window read stays in bounds.
struct Bits {
    words: usize,
    rows: Vec<u64>,
}

impl Bits {
    fn of(img: &BinaryImage) -> Self {
        let words = img.width().div_ceil(64) + 1;
        let mut rows = vec![0u64; words * img.height()];
        for y in 0..img.height() {
            for x in 0..img.width() {
                if img.get(x, y) {
                    rows[y * words + x / 64] |= 1 << (x % 64);
                }
            }
        }
        Self { words, rows }
    }

    fn window(&self, y: usize, x: usize, mask: u64) -> u64 {
        let row = &self.rows[y * self.words..(y + 1) * self.words];
        let (w, o) = (x / 64, x % 64);
        let bits = if o == 0 {
            row[w]
        } else {
            (row[w] >> o) | (row[w + 1] << (64 - o))
        };
        bits & mask
    }
}

struct Integral {
    stride: usize,
    sums: Vec<u32>,
}

impl Integral {
    fn of(img: &BinaryImage) -> Self {
        let stride = img.width() + 1;
        let mut sums = vec![0u32; stride * (img.height() + 1)];
        for y in 0..img.height() {
            let mut run = 0;
            for x in 0..img.width() {
                run += img.get(x, y) as u32;
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + run;
            }
        }
        Self { stride, sums }
    }

    fn count(&self, x: usize, y: usize, w: usize, h: usize) -> u32 {
        let s = |x: usize, y: usize| self.sums[y * self.stride + x];
        s(x + w, y + h) + s(x, y) - s(x + w, y) - s(x, y + h)
    }
}

struct Variant {
    class: SymbolClass,
    width: usize,
    height: usize,
    rows: Vec<u64>,
    ink: u32,
}

impl Variant {
    fn of(class: SymbolClass, mask: &BinaryImage) -> Self {
        let rows = (0..mask.height())
            .map(|y| (0..mask.width()).fold(0u64, |acc, x| acc | ((mask.get(x, y) as u64) << x)))
            .collect();
        Self {
            class,
            width: mask.width(),
            height: mask.height(),
            rows,
            ink: mask.count() as u32,
        }
    }
}

/// Slides every template rotation over the sheet and scores each window by
/// Jaccard overlap. Hits at or above `threshold` are reduced by same-class
/// non-maximum suppression.
pub fn match_templates(
    image: &BinaryImage,
    library: &[SymbolTemplate],
    threshold: f64,
) -> Vec<SymbolDetection> {
    let bits = Bits::of(image);
    let integral = Integral::of(image);
    let variants: Vec<Variant> = library
        .iter()
        .flat_map(|t| {
            t.variants()
                .into_iter()
                .map(move |m| Variant::of(t.class, &m))
        })
        .collect();

    let mut hits: Vec<(SymbolDetection, usize)> = Vec::new();
    for (vi, v) in variants.iter().enumerate() {
        if v.width > image.width() || v.height > image.height() {
            continue;
        }
        let mask = if v.width == 64 {
            u64::MAX
        } else {
            (1u64 << v.width) - 1
        };
        for y in 0..=image.height() - v.height {
            for x in 0..=image.width() - v.width {
                let window = integral.count(x, y, v.width, v.height);
                // Jaccard cannot exceed min/max of the two ink counts.
                let (lo, hi) = (window.min(v.ink), window.max(v.ink));
                if hi == 0 || (lo as f64) < threshold * hi as f64 {
                    continue;
                }
                let inter: u32 = v
                    .rows
                    .iter()
                    .enumerate()
                    .map(|(dy, &t)| (bits.window(y + dy, x, mask) & t).count_ones())
                    .sum();
                let score = inter as f64 / (window + v.ink - inter) as f64;
                if score >= threshold {
                    let bbox = BBox::new(
                        x as i32,
                        y as i32,
                        (x + v.width - 1) as i32,
                        (y + v.height - 1) as i32,
                    );
                    hits.push((
                        SymbolDetection {
                            class: v.class,
                            bbox,
                            score,
                        },
                        vi,
                    ));
                }
            }
        }
    }

    hits.sort_by(|(a, va), (b, vb)| {
        b.score
            .total_cmp(&a.score)
            .then(a.bbox.y0.cmp(&b.bbox.y0))
            .then(a.bbox.x0.cmp(&b.bbox.x0))
            .then(va.cmp(vb))
    });
    let mut kept: Vec<SymbolDetection> = Vec::new();
    for (d, _) in hits {
        if !kept
            .iter()
            .any(|k| k.class == d.class && k.bbox.iou(&d.bbox) > NMS_IOU)
        {
            kept.push(d);
        }
    }
    kept.sort_by_key(|d| (d.bbox.y0, d.bbox.x0, d.class));
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jaccard_at(a: &BinaryImage, b: &BinaryImage, dx: i64, dy: i64) -> f64 {
        let (mut inter, mut union) = (0usize, 0usize);
        for y in -8..(a.height() as i64 + 8) {
            for x in -8..(a.width() as i64 + 8) {
                let p = a.at(x, y);
                let q = b.at(x - dx, y - dy);
                inter += (p && q) as usize;
                union += (p || q) as usize;
            }
        }
        inter as f64 / union as f64
    }

    #[test]
    fn rotation_composes() {
        let m = render_symbol(SymbolClass::Concentric);
        let twice = rotate_mask(&rotate_mask(&m, Rotation::R90), Rotation::R90);
        assert_eq!(twice, rotate_mask(&m, Rotation::R180));
        let full = rotate_mask(&rotate_mask(&m, Rotation::R270), Rotation::R90);
        assert_eq!(full, m);
    }

    #[test]
    fn built_in_glyphs_are_mutually_distinct() {
        let lib = builtin_library();
        let mut worst = 0.0f64;
        for a in &lib {
            for b in &lib {
                if a.class == b.class {
                    continue;
                }
                for vb in b.variants() {
                    for dy in -3..=3 {
                        for dx in -3..=3 {
                            let j = jaccard_at(a.mask(), &vb, dx, dy);
                            assert!(j < 0.7, "{} vs {} at ({dx},{dy}): {j:.3}", a.class, b.class);
                            worst = worst.max(j);
                        }
                    }
                }
            }
        }
        assert!(worst > 0.0);
    }

    fn plant(sheet: &mut BinaryImage, mask: &BinaryImage, x: usize, y: usize) {
        for my in 0..mask.height() {
            for mx in 0..mask.width() {
                if mask.get(mx, my) {
                    sheet.set(x + mx, y + my, true);
                }
            }
        }
    }

    #[test]
    fn exact_copy_self_matches() {
        let lib = builtin_library();
        let mut sheet = BinaryImage::new(120, 80).unwrap();
        plant(&mut sheet, lib[0].mask(), 40, 30);
        let found = match_templates(&sheet, &lib, 0.8);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].class, SymbolClass::BallValve);
        assert_eq!(found[0].bbox, BBox::new(40, 30, 65, 55));
        assert!(found[0].score >= 0.99);
    }

    #[test]
    fn blank_sheet_has_no_hits() {
        let sheet = BinaryImage::new(100, 100).unwrap();
        assert!(match_templates(&sheet, &builtin_library(), 0.8).is_empty());
    }

    #[test]
    fn score_is_translation_invariant() {
        let lib = builtin_library();
        let m = render_symbol(SymbolClass::CheckValve);
        let mut a = BinaryImage::new(100, 100).unwrap();
        let mut b = BinaryImage::new(100, 100).unwrap();
        plant(&mut a, &m, 10, 20);
        a.set(12, 18, true);
        plant(&mut b, &m, 37, 51);
        b.set(39, 49, true);
        let fa = match_templates(&a, &lib, 0.5);
        let fb = match_templates(&b, &lib, 0.5);
        assert_eq!(fa.len(), fb.len());
        for (p, q) in fa.iter().zip(&fb) {
            assert_eq!(p.score, q.score);
            assert_eq!((q.bbox.x0 - p.bbox.x0, q.bbox.y0 - p.bbox.y0), (27, 31));
        }
    }

    #[test]
    fn planted_symbols_on_pipes_are_recovered() {
        let lib = builtin_library();
        let mut sheet = BinaryImage::new(400, 200).unwrap();
        // Two horizontal pipes and one vertical pipe.
        draw::fill_rect(&mut sheet, BBox::new(10, 50, 390, 51));
        draw::fill_rect(&mut sheet, BBox::new(10, 150, 390, 151));
        draw::fill_rect(&mut sheet, BBox::new(300, 60, 301, 140));
        let plan = [
            (SymbolClass::BallValve, Rotation::R0, 40, 38),
            (SymbolClass::BallValve, Rotation::R0, 200, 138),
            (SymbolClass::Insulation, Rotation::R0, 120, 38),
            (SymbolClass::Insulation, Rotation::R0, 60, 138),
            (SymbolClass::CheckValve, Rotation::R90, 288, 80),
            (SymbolClass::CheckValve, Rotation::R0, 330, 38),
        ];
        for &(c, r, x, y) in &plan {
            plant(&mut sheet, &rotate_mask(&render_symbol(c), r), x, y);
        }
        let found = match_templates(&sheet, &lib, 0.8);
        assert_eq!(found.len(), plan.len(), "{found:?}");
        for &(c, _, x, y) in &plan {
            let truth = BBox::new(x as i32, y as i32, x as i32 + 25, y as i32 + 25);
            assert!(found
                .iter()
                .any(|d| d.class == c && d.bbox.iou(&truth) >= 0.7));
        }
    }

    #[test]
    fn library_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let lib = builtin_library();
        save_library(dir.path(), &lib).unwrap();
        assert!(dir.path().join("Gb-V-nc_0.png").exists());
        let back = load_library(dir.path()).unwrap();
        assert_eq!(back, lib);
    }
}

//! Instrument symbols: the closed class inventory, detection ingestion, a
//! classical template matcher, and patch annotation tooling.

mod annotate;
mod templates;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::BBox;
use crate::raster::BinaryImage;

pub use annotate::{
    augment_patches, export_mask_boundaries, export_patches, tile_sheet, AnnotationConfig,
    Augmentation, Patch, Transform,
};
pub use templates::{
    builtin_library, load_library, match_templates, render_symbol, rotate_mask, save_library,
    Rotation, SymbolTemplate, TEMPLATE_SIZE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolClass {
    BallValve,
    CheckValve,
    ChemicalSeal,
    CircleValve,
    Concentric,
    FloodConnection,
    GateValveNc,
    GlobeValve,
    Insulation,
    GlobeValveNc,
    Others,
}

impl SymbolClass {
    /// Inventory order, which is also the confusion-matrix axis order.
    pub const ALL: [SymbolClass; 11] = [
        SymbolClass::BallValve,
        SymbolClass::CheckValve,
        SymbolClass::ChemicalSeal,
        SymbolClass::CircleValve,
        SymbolClass::Concentric,
        SymbolClass::FloodConnection,
        SymbolClass::GateValveNc,
        SymbolClass::GlobeValve,
        SymbolClass::Insulation,
        SymbolClass::GlobeValveNc,
        SymbolClass::Others,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SymbolClass::BallValve => "Bl-V",
            SymbolClass::CheckValve => "Ck-V",
            SymbolClass::ChemicalSeal => "Ch-sl",
            SymbolClass::CircleValve => "Cr-V",
            SymbolClass::Concentric => "Con",
            SymbolClass::FloodConnection => "F-Con",
            SymbolClass::GateValveNc => "Gt-V-nc",
            SymbolClass::GlobeValve => "Gb-V",
            SymbolClass::Insulation => "Ins",
            SymbolClass::GlobeValveNc => "Gb-V-nc",
            SymbolClass::Others => "Others",
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).expect("listed")
    }
}

impl fmt::Display for SymbolClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SymbolClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| format!("unknown symbol class {s:?}"))
    }
}

impl Serialize for SymbolClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for SymbolClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolDetection {
    pub class: SymbolClass,
    pub bbox: BBox,
    #[serde(serialize_with = "crate::geom::ser_round3")]
    pub score: f64,
}

#[derive(Deserialize)]
struct RawDetection {
    class: String,
    bbox: BBox,
    score: f64,
}

/// Parses the symbol-detections JSON document. Unknown labels and bad boxes
/// are reported with the record index.
pub fn parse_symbol_detections(
    json: &str,
    bounds: Option<(usize, usize)>,
) -> Result<Vec<SymbolDetection>> {
    const CTX: &str = "symbol detections";
    let raw: Vec<RawDetection> = serde_json::from_str(json).map_err(|e| Error::schema(CTX, &e))?;
    raw.into_iter()
        .enumerate()
        .map(|(index, r)| {
            let fail = |message: String| Error::Validation {
                context: CTX.into(),
                index,
                message,
            };
            let class = r.class.parse::<SymbolClass>().map_err(fail)?;
            if !r.bbox.is_valid() {
                return Err(fail(format!(
                    "bbox {:?} has x1 < x0 or y1 < y0",
                    r.bbox.to_array()
                )));
            }
            if let Some((w, h)) = bounds {
                if !r.bbox.within(w, h) {
                    return Err(fail(format!(
                        "bbox {:?} outside {w}x{h} sheet",
                        r.bbox.to_array()
                    )));
                }
            }
            if !(0.0..=1.0).contains(&r.score) {
                return Err(fail(format!("score {} outside [0, 1]", r.score)));
            }
            Ok(SymbolDetection {
                class,
                bbox: r.bbox,
                score: r.score,
            })
        })
        .collect()
}

fn runs(ink: impl Iterator<Item = bool>) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, v) in ink.chain(std::iter::once(false)).enumerate() {
        match (v, start) {
            (true, None) => start = Some(i as i32),
            (false, Some(s)) => {
                out.push((s, i as i32 - 1));
                start = None;
            }
            _ => {}
        }
    }
    out
}

/// Replaces each symbol that a single pipe passes straight through with a
/// plain stroke joining the pipe where it enters and leaves the box, so line
/// detection sees an uninterrupted pipeline.
pub fn heal_symbols(image: &BinaryImage, symbols: &[SymbolDetection]) -> BinaryImage {
    let mut out = image.clone();
    for sym in symbols {
        let b = sym.bbox.expand(2);
        if !b.within(image.width(), image.height()) {
            continue;
        }
        let (x0, y0, x1, y1) = (b.x0 as i64, b.y0 as i64, b.x1 as i64, b.y1 as i64);
        let col = |x: i64| runs((y0..=y1).map(|y| image.at(x, y)));
        let row = |y: i64| runs((x0..=x1).map(|x| image.at(x, y)));
        let (left, right, top, bottom) = (col(x0), col(x1), row(y0), row(y1));
        let (a, c, horizontal) = match (left.len(), right.len(), top.len(), bottom.len()) {
            (1, 1, 0, 0) => (left[0], right[0], true),
            (0, 0, 1, 1) => (top[0], bottom[0], false),
            _ => continue,
        };
        let inner = BBox::new(b.x0 + 1, b.y0 + 1, b.x1 - 1, b.y1 - 1);
        out = crate::raster::erase_regions(&out, &[inner]);
        let (from, to) = (b.x0 + 1, b.x1 - 1);
        let (base_a, base_c) = if horizontal {
            (b.y0, b.y0)
        } else {
            (b.x0, b.x0)
        };
        if a == c {
            let (lo, hi) = (base_a + a.0, base_a + a.1);
            let fill = if horizontal {
                BBox::new(from, lo, to, hi)
            } else {
                BBox::new(lo, b.y0 + 1, hi, b.y1 - 1)
            };
            crate::draw::fill_rect(&mut out, fill);
        } else {
            let mid = |r: (i32, i32), base: i32| base as f64 + (r.0 + r.1) as f64 / 2.0;
            let radius = ((a.1 - a.0 + 1).max(c.1 - c.0 + 1)) as f64 / 2.0;
            let (p, q) = if horizontal {
                (
                    crate::geom::Point::new(b.x0 as f64, mid(a, base_a)),
                    crate::geom::Point::new(b.x1 as f64, mid(c, base_c)),
                )
            } else {
                (
                    crate::geom::Point::new(mid(a, base_a), b.y0 as f64),
                    crate::geom::Point::new(mid(c, base_c), b.y1 as f64),
                )
            };
            crate::draw::stroke(&mut out, p, q, radius);
        }
    }
    out
}

pub fn ingest_symbol_detections(
    path: impl AsRef<Path>,
    bounds: Option<(usize, usize)>,
) -> Result<Vec<SymbolDetection>> {
    let path = path.as_ref();
    let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_symbol_detections(&json, bounds).map_err(|e| match e {
        Error::Schema {
            line,
            column,
            message,
            ..
        } => Error::Schema {
            context: path.display().to_string(),
            line,
            column,
            message,
        },
        Error::Validation { index, message, .. } => Error::Validation {
            context: path.display().to_string(),
            index,
            message,
        },
        e => e,
    })
}

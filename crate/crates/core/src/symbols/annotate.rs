use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{dilate, erode, BinaryImage, GrayImage};

const BACKGROUND: u8 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Augmentation {
    Translation,
    Rotation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationConfig {
    pub patch_size: usize,
    pub stride: usize,
    pub boundary_dilation: usize,
    pub augmentations: BTreeSet<Augmentation>,
    /// Largest translation offset, in pixels.
    pub max_shift: usize,
    /// Largest per-axis jitter applied to rotated copies.
    pub rotation_jitter: usize,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        Self {
            patch_size: 400,
            stride: 400,
            boundary_dilation: 3,
            augmentations: BTreeSet::new(),
            max_shift: 16,
            rotation_jitter: 2,
        }
    }
}

impl AnnotationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 || self.stride > self.patch_size {
            return Err(Error::param(
                "stride",
                format!(
                    "need 1 <= stride <= patch size, got {} and {}",
                    self.stride, self.patch_size
                ),
            ));
        }
        if self.boundary_dilation.is_multiple_of(2) {
            return Err(Error::param("boundary_dilation", "must be odd"));
        }
        if self.augmentations.contains(&Augmentation::Rotation) && self.rotation_jitter == 0 {
            return Err(Error::param(
                "rotation_jitter",
                "must be at least 1 with rotation on",
            ));
        }
        if self.augmentations.contains(&Augmentation::Translation) && self.max_shift == 0 {
            return Err(Error::param(
                "max_shift",
                "must be at least 1 with translation on",
            ));
        }
        Ok(())
    }
}

/// Clockwise quarter turns followed by a shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Transform {
    pub quarter_turns: u8,
    pub dx: i32,
    pub dy: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub offset_x: usize,
    pub offset_y: usize,
    pub image: GrayImage,
    pub annotation: Option<BinaryImage>,
    pub transform: Transform,
}

fn offsets(extent: usize, size: usize, stride: usize) -> Vec<usize> {
    let mut out = vec![0];
    while out.last().unwrap() + size < extent {
        out.push(out.last().unwrap() + stride);
    }
    out
}

fn crop<T: Copy>(
    data: &[T],
    width: usize,
    height: usize,
    ox: usize,
    oy: usize,
    size: usize,
    bg: T,
) -> Vec<T> {
    let mut out = vec![bg; size * size];
    for y in 0..size.min(height.saturating_sub(oy)) {
        for x in 0..size.min(width.saturating_sub(ox)) {
            out[y * size + x] = data[(oy + y) * width + ox + x];
        }
    }
    out
}

/// Cuts the sheet into square patches covering every pixel. Remainder
/// patches are padded with background; an optional mask is cut alongside.
pub fn tile_sheet(
    image: &GrayImage,
    mask: Option<&BinaryImage>,
    config: &AnnotationConfig,
) -> Result<Vec<Patch>> {
    config.validate()?;
    let (w, h, s) = (image.width(), image.height(), config.patch_size);
    if let Some(m) = mask {
        if (m.width(), m.height()) != (w, h) {
            return Err(Error::DimensionMismatch {
                image: (w, h),
                result: (m.width(), m.height()),
            });
        }
    }
    let mut patches = Vec::new();
    for &oy in &offsets(h, s, config.stride) {
        for &ox in &offsets(w, s, config.stride) {
            let luma = crop(image.luma(), w, h, ox, oy, s, BACKGROUND);
            let annotation = mask.map(|m| {
                BinaryImage::from_vec(s, s, crop(m.ink(), w, h, ox, oy, s, false)).expect("square")
            });
            patches.push(Patch {
                offset_x: ox,
                offset_y: oy,
                image: GrayImage::new(s, s, luma)?,
                annotation,
                transform: Transform::default(),
            });
        }
    }
    Ok(patches)
}

/// Boundary of a filled symbol mask (mask minus its 3×3 erosion), dilated by
/// the configured square.
pub fn export_mask_boundaries(
    mask: &BinaryImage,
    config: &AnnotationConfig,
) -> Result<BinaryImage> {
    config.validate()?;
    let boundary = mask.and_not(&erode(mask, 3)?);
    dilate(&boundary, config.boundary_dilation)
}

fn transform<T: Copy>(
    data: &[T],
    width: usize,
    height: usize,
    t: Transform,
    bg: T,
) -> (usize, usize, Vec<T>) {
    let turns = t.quarter_turns % 4;
    let (nw, nh) = if turns % 2 == 1 {
        (height, width)
    } else {
        (width, height)
    };
    let mut out = vec![bg; nw * nh];
    for y in 0..height {
        for x in 0..width {
            let (rx, ry) = match turns {
                0 => (x, y),
                1 => (height - 1 - y, x),
                2 => (width - 1 - x, height - 1 - y),
                _ => (y, width - 1 - x),
            };
            let (tx, ty) = (rx as i64 + t.dx as i64, ry as i64 + t.dy as i64);
            if tx >= 0 && ty >= 0 && (tx as usize) < nw && (ty as usize) < nh {
                out[ty as usize * nw + tx as usize] = data[y * width + x];
            }
        }
    }
    (nw, nh, out)
}

fn apply(p: &Patch, t: Transform) -> Patch {
    let (w, h) = (p.image.width(), p.image.height());
    let (nw, nh, luma) = transform(p.image.luma(), w, h, t, BACKGROUND);
    let annotation = p.annotation.as_ref().map(|m| {
        let (aw, ah, ink) = transform(m.ink(), m.width(), m.height(), t, false);
        BinaryImage::from_vec(aw, ah, ink).expect("same size")
    });
    Patch {
        offset_x: p.offset_x,
        offset_y: p.offset_y,
        image: GrayImage::new(nw, nh, luma).expect("same size"),
        annotation,
        transform: t,
    }
}

/// Appends augmented copies after each input patch. Rotation adds the four
/// quarter turns, each shifted by a small seeded jitter (never zero for the
/// unrotated copy); translation adds shifts of ±k along each axis with a
/// seeded k per copy.
pub fn augment_patches(
    patches: &[Patch],
    config: &AnnotationConfig,
    seed: u64,
) -> Result<Vec<Patch>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for p in patches {
        out.push(p.clone());
        if config.augmentations.contains(&Augmentation::Rotation) {
            let j = config.rotation_jitter as i32;
            for turns in 0..4u8 {
                let (dx, dy) = loop {
                    let d = (rng.random_range(-j..=j), rng.random_range(-j..=j));
                    if turns != 0 || d != (0, 0) {
                        break d;
                    }
                };
                out.push(apply(
                    p,
                    Transform {
                        quarter_turns: turns,
                        dx,
                        dy,
                    },
                ));
            }
        }
        if config.augmentations.contains(&Augmentation::Translation) {
            for (sx, sy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let k = rng.random_range(1..=config.max_shift as i32);
                out.push(apply(
                    p,
                    Transform {
                        quarter_turns: 0,
                        dx: sx * k,
                        dy: sy * k,
                    },
                ));
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct PatchRecord {
    file: String,
    annotation: Option<String>,
    offset: [usize; 2],
    transform: Transform,
}

/// Writes `patch_<ox>_<oy>.png` (with an `_aug<n>` suffix for augmented
/// copies), matching `_mask.png` annotations, and `patches.json`.
pub fn export_patches(dir: impl AsRef<Path>, patches: &[Patch]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut records = Vec::with_capacity(patches.len());
    let mut aug = 0usize;
    for p in patches {
        let stem = if p.transform == Transform::default() {
            format!("patch_{}_{}", p.offset_x, p.offset_y)
        } else {
            aug += 1;
            format!("patch_{}_{}_aug{}", p.offset_x, p.offset_y, aug)
        };
        let file = format!("{stem}.png");
        p.image.save_png(dir.join(&file))?;
        let annotation = match &p.annotation {
            Some(m) => {
                let f = format!("{stem}_mask.png");
                m.to_gray().save_png(dir.join(&f))?;
                Some(f)
            }
            None => None,
        };
        records.push(PatchRecord {
            file,
            annotation,
            offset: [p.offset_x, p.offset_y],
            transform: p.transform,
        });
    }
    let manifest = serde_json::json!({ "schema": "pid-graph-patches/1", "patches": records });
    let path = dir.join("patches.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

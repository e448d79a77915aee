//! Deterministic synthetic sheets with complete ground truth.

mod corpus;
pub mod font;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codes::{CodeGrammar, PipelineCode, TextRegion, Token};
use crate::draw;
use crate::error::{Error, Result};
use crate::flow::{build_forest, prune_forest, Association, ComponentRef};
use crate::geom::{BBox, Point};
use crate::lines::{compute_intersections, Junction, Segment};
use crate::raster::{BinaryImage, GrayImage};
use crate::result::{Components, PidGraph, Report};
use crate::symbols::{render_symbol, SymbolClass, SymbolDetection, TEMPLATE_SIZE};
use crate::tags::{Direction, Tag, TagKind};

pub use corpus::{
    corpus, finish_corpus, load_spec, write_sheet, CorpusEntry, CorpusManifest, SheetFiles,
    CORPUS_SCHEMA,
};

pub const SHEET_SCHEMA: &str = "pid-graph-sheet/1";
const THICKNESS: i32 = 2;
const MARGIN_X: i32 = 20;
const MARGIN_Y: i32 = 70;
const MIN_PITCH: i32 = 100;
/// Overhang of lines past the junctions they form.
const OVERHANG: i32 = 20;
const CODE_GAP: i32 = 20;
const SYMBOL_GAP: i32 = 40;
const TEXT_GAP: i32 = 10;
/// Clearance from a line's ends for anything placed on it.
const END_CLEARANCE: i32 = 15;
const WINDOW: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Noise {
    None,
    /// Each background pixel turns to ink with probability `p`.
    Speckle {
        p: f64,
    },
    /// `count` gaps of `n` pixels cut into random lines.
    BreakGaps {
        n: usize,
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolPlacement {
    pub class: SymbolClass,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SheetSpec {
    pub schema: String,
    pub width: usize,
    pub height: usize,
    pub outlets: usize,
    pub inlets: usize,
    /// Total pipelines drawn; lines beyond the connectivity minimum become dead branches.
    pub lines: usize,
    /// Exact junction count to require, if any.
    pub junctions: Option<usize>,
    pub symbols: Vec<SymbolPlacement>,
    pub grammar: CodeGrammar,
    /// Non-code text labels scattered near lines.
    pub distractors: usize,
    pub noise: Noise,
    pub tag_width: usize,
    pub tag_height: usize,
    pub text_scale: usize,
    pub max_attempts: usize,
}

impl Default for SheetSpec {
    fn default() -> Self {
        let one = |class| SymbolPlacement { class, count: 1 };
        Self {
            schema: SHEET_SCHEMA.into(),
            width: 1600,
            height: 1000,
            outlets: 2,
            inlets: 4,
            lines: 8,
            junctions: None,
            symbols: vec![
                one(SymbolClass::BallValve),
                one(SymbolClass::GateValveNc),
                one(SymbolClass::CheckValve),
                one(SymbolClass::GlobeValve),
            ],
            grammar: CodeGrammar::default(),
            distractors: 2,
            noise: Noise::None,
            tag_width: 96,
            tag_height: 30,
            text_scale: 2,
            max_attempts: 64,
        }
    }
}

impl SheetSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| Err(Error::param(name, reason.to_string()));
        if self.schema != SHEET_SCHEMA {
            return bad("schema", "unknown sheet spec schema");
        }
        if self.outlets == 0 {
            return bad("outlets", "at least one outlet is required");
        }
        if self.inlets < self.outlets {
            return bad("inlets", "every outlet needs at least one inlet");
        }
        if self.tag_height < 6 || self.tag_width < 3 * self.tag_height {
            return bad(
                "tag_width",
                "tags must be at least three times as wide as high",
            );
        }
        if self.text_scale == 0 {
            return bad("text_scale", "must be positive");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts", "must be positive");
        }
        if let Noise::Speckle { p } = self.noise {
            if !(0.0..=1.0).contains(&p) {
                return bad("noise", "speckle probability outside [0, 1]");
            }
        }
        if let Some(c) = self.grammar.tokens().iter().find_map(|t| match t {
            Token::Literal(c) if !font::supports(*c) => Some(*c),
            _ => None,
        }) {
            return Err(Error::param(
                "grammar",
                format!("literal {c:?} has no glyph"),
            ));
        }
        Ok(())
    }
}

/// Everything a detector should recover from the rendered sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub graph: PidGraph,
    /// Simulated OCR output: every code plus the distractor labels.
    pub text_regions: Vec<TextRegion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone)]
struct TagPlan {
    kind: TagKind,
    side: Side,
    row: usize,
}

/// Horizontal pipeline on one row.
#[derive(Debug, Clone)]
struct HLine {
    r: i32,
    xa: i32,
    xb: i32,
    tags: Vec<usize>,
    occupied: Vec<(i32, i32)>,
}

#[derive(Debug, Clone)]
struct VLine {
    x: i32,
    ya: i32,
    yb: i32,
}

struct Layout {
    tags: Vec<Tag>,
    hlines: Vec<HLine>,
    vlines: Vec<VLine>,
    codes: Vec<(PipelineCode, usize)>,
    distractors: Vec<(String, BBox)>,
    symbols: Vec<(SymbolDetection, usize)>,
}

fn fail(attempts: usize, reason: impl Into<String>) -> Error {
    Error::Generation {
        attempts,
        reason: reason.into(),
    }
}

/// Uniformly picks a start `x` in `[lo, hi - w + 1]` keeping `gap` clear of
/// every occupied interval.
fn place(
    rng: &mut ChaCha8Rng,
    occupied: &[(i32, i32)],
    lo: i32,
    hi: i32,
    w: i32,
    gap: i32,
) -> Option<i32> {
    let free: Vec<i32> = (lo..=hi - w + 1)
        .filter(|&x| {
            occupied
                .iter()
                .all(|&(a, b)| x + w - 1 + gap < a || x - gap > b)
        })
        .collect();
    free.choose(rng).copied()
}

fn random_code(rng: &mut ChaCha8Rng, grammar: &CodeGrammar) -> String {
    grammar
        .tokens()
        .iter()
        .map(|t| match t {
            Token::Digit => char::from(b'0' + rng.random_range(0..10u8)),
            Token::Alpha => char::from(b'A' + rng.random_range(0..26u8)),
            Token::Literal(c) => *c,
        })
        .collect()
}

fn distractor_text(rng: &mut ChaCha8Rng, grammar: &CodeGrammar) -> String {
    const PREFIX: [&str; 5] = ["PI", "FV", "TI", "LT", "PG"];
    loop {
        let digits = rng.random_range(3..=4);
        let mut s = format!("{}-", PREFIX[rng.random_range(0..PREFIX.len())]);
        for _ in 0..digits {
            s.push(char::from(b'0' + rng.random_range(0..10u8)));
        }
        if !grammar.validate(&s) {
            return s;
        }
    }
}

fn tag_shape(spec: &SheetSpec, side: Side, kind: TagKind, r: i32) -> Tag {
    let (tw, th) = (spec.tag_width as i32, spec.tag_height as i32);
    let (x0, x1) = match side {
        Side::Left => (MARGIN_X, MARGIN_X + tw - 1),
        Side::Right => (
            spec.width as i32 - MARGIN_X - tw,
            spec.width as i32 - MARGIN_X - 1,
        ),
    };
    let (y0, y1) = (r + 1 - th / 2, r + th - th / 2);
    let cy = (y0 + y1) as f64 / 2.0;
    // Outlets point away from the sheet edge, inlets toward it.
    let direction = match (side, kind) {
        (Side::Left, TagKind::Outlet) | (Side::Right, TagKind::Inlet) => Direction::Right,
        _ => Direction::Left,
    };
    let (fx0, fx1, fy0, fy1, h) = (x0 as f64, x1 as f64, y0 as f64, y1 as f64, (th - 1) as f64);
    let vertices = match direction {
        Direction::Right => [
            Point::new(fx0, fy0),
            Point::new(fx1 - h, fy0),
            Point::new(fx1, cy),
            Point::new(fx1 - h, fy1),
            Point::new(fx0, fy1),
        ],
        Direction::Left => [
            Point::new(fx1, fy0),
            Point::new(fx0 + h, fy0),
            Point::new(fx0, cy),
            Point::new(fx0 + h, fy1),
            Point::new(fx1, fy1),
        ],
    };
    let emerge_x = match side {
        Side::Left => fx1,
        Side::Right => fx0,
    };
    Tag::new(
        vertices,
        BBox::new(x0, y0, x1, y1),
        direction,
        kind,
        Point::new(emerge_x, cy),
    )
}

fn layout(spec: &SheetSpec, rng: &mut ChaCha8Rng, attempt: usize) -> Result<Layout> {
    let (w, h) = (spec.width as i32, spec.height as i32);
    let groups = spec.outlets;
    let mut sizes = vec![1usize; groups];
    for _ in 0..spec.inlets - spec.outlets {
        sizes[rng.random_range(0..groups)] += 1;
    }
    // A single-inlet group may share one line with its outlet to save lines.
    let mut direct = vec![false; groups];
    let mut base: usize = sizes.iter().map(|k| k + 2).sum();
    for g in 0..groups {
        if base <= spec.lines {
            break;
        }
        if sizes[g] == 1 {
            direct[g] = true;
            base -= 2;
        }
    }
    if base > spec.lines {
        return Err(fail(
            attempt,
            format!(
                "{} lines cannot connect the requested tags (need {base})",
                spec.lines
            ),
        ));
    }
    let stubs = spec.lines - base;
    let rows: usize = (0..groups)
        .map(|g| if direct[g] { 1 } else { sizes[g] + 1 })
        .sum();
    let pitch = (h - 2 * MARGIN_Y) / rows.max(1) as i32;
    if pitch < MIN_PITCH {
        return Err(fail(
            attempt,
            format!("{rows} rows do not fit a {h} px sheet"),
        ));
    }
    let row_y: Vec<i32> = (0..rows as i32)
        .map(|i| MARGIN_Y + pitch * i + pitch / 2 + rng.random_range(-pitch / 10..=pitch / 10))
        .collect();

    let mut plans: Vec<TagPlan> = Vec::new();
    let mut hlines: Vec<HLine> = Vec::new();
    let mut vlines: Vec<VLine> = Vec::new();
    let mut row = 0;
    let column = |rng: &mut ChaCha8Rng| rng.random_range(w * 35 / 100..=w * 65 / 100);
    let tag_x = |side: Side| match side {
        Side::Left => MARGIN_X + spec.tag_width as i32,
        Side::Right => w - MARGIN_X - spec.tag_width as i32 - 1,
    };
    for g in 0..groups {
        if direct[g] {
            let r = row_y[row];
            plans.push(TagPlan {
                kind: TagKind::Outlet,
                side: Side::Left,
                row,
            });
            plans.push(TagPlan {
                kind: TagKind::Inlet,
                side: Side::Right,
                row,
            });
            hlines.push(HLine {
                r,
                xa: tag_x(Side::Left),
                xb: tag_x(Side::Right),
                tags: vec![plans.len() - 2, plans.len() - 1],
                occupied: Vec::new(),
            });
            row += 1;
            continue;
        }
        let c = column(rng);
        let mut kinds = vec![TagKind::Outlet];
        kinds.extend(std::iter::repeat_n(TagKind::Inlet, sizes[g]));
        kinds.shuffle(rng);
        let first = row;
        for kind in kinds {
            let side = if rng.random_bool(0.5) {
                Side::Left
            } else {
                Side::Right
            };
            let r = row_y[row];
            plans.push(TagPlan { kind, side, row });
            let (xa, xb) = match side {
                Side::Left => (tag_x(side), c + 1 + OVERHANG),
                Side::Right => (c - OVERHANG, tag_x(side)),
            };
            hlines.push(HLine {
                r,
                xa,
                xb,
                tags: vec![plans.len() - 1],
                occupied: vec![(c, c + 1)],
            });
            row += 1;
        }
        vlines.push(VLine {
            x: c,
            ya: row_y[first] - OVERHANG,
            yb: row_y[row - 1] + 1 + OVERHANG,
        });
    }

    let tags: Vec<Tag> = plans
        .iter()
        .map(|p| tag_shape(spec, p.side, p.kind, row_y[p.row]))
        .collect();

    // Dead-branch stubs crossing a random line away from other junctions.
    let reach = (pitch - 60).clamp(28, 36);
    for _ in 0..stubs {
        let li = rng.random_range(0..hlines.len());
        let l = &hlines[li];
        let Some(x) = place(
            rng,
            &l.occupied,
            l.xa + 30,
            l.xb - 30,
            THICKNESS,
            SYMBOL_GAP,
        ) else {
            return Err(fail(attempt, "no room for a dead-branch line"));
        };
        let (up, down) = (rng.random_range(28..=reach), rng.random_range(28..=reach));
        vlines.push(VLine {
            x,
            ya: l.r - up,
            yb: l.r + 1 + down,
        });
        hlines[li].occupied.push((x, x + 1));
    }

    let scale = spec.text_scale;
    let mut codes = Vec::new();
    for (li, l) in hlines.iter_mut().enumerate() {
        let text = random_code(rng, &spec.grammar);
        let (tw, th) = font::text_size(&text, scale);
        let Some(x) = place(
            rng,
            &l.occupied,
            l.xa + END_CLEARANCE,
            l.xb - END_CLEARANCE,
            tw as i32,
            CODE_GAP,
        ) else {
            return Err(fail(attempt, "no room for a pipeline code"));
        };
        let y0 = l.r - 7 - th as i32;
        // The glyph extent is recomputed on render; this is the layout box.
        let bbox = BBox::new(x, y0, x + tw as i32 - 1, y0 + th as i32 - 1);
        l.occupied.push((x, x + tw as i32 - 1));
        codes.push((PipelineCode { text, bbox }, li));
    }

    let mut symbols = Vec::new();
    let mut wanted: Vec<SymbolClass> = spec
        .symbols
        .iter()
        .flat_map(|p| std::iter::repeat_n(p.class, p.count))
        .collect();
    wanted.sort();
    let side = TEMPLATE_SIZE as i32;
    for class in wanted {
        let mut order: Vec<usize> = (0..hlines.len()).collect();
        order.shuffle(rng);
        let spot = order.into_iter().find_map(|li| {
            let l = &hlines[li];
            place(
                rng,
                &l.occupied,
                l.xa + END_CLEARANCE,
                l.xb - END_CLEARANCE,
                side,
                SYMBOL_GAP,
            )
            .map(|x| (li, x))
        });
        let Some((li, x)) = spot else {
            return Err(fail(attempt, "no room for a symbol"));
        };
        let l = &mut hlines[li];
        l.occupied.push((x, x + side - 1));
        let bbox = BBox::new(x, l.r - 12, x + side - 1, l.r + 13);
        symbols.push((
            SymbolDetection {
                class,
                bbox,
                score: 1.0,
            },
            li,
        ));
    }

    let mut distractors = Vec::new();
    for _ in 0..spec.distractors {
        let text = distractor_text(rng, &spec.grammar);
        let (tw, th) = font::text_size(&text, scale);
        let li = rng.random_range(0..hlines.len());
        let l = &mut hlines[li];
        let Some(x) = place(
            rng,
            &l.occupied,
            l.xa + END_CLEARANCE,
            l.xb - END_CLEARANCE,
            tw as i32,
            TEXT_GAP.max(CODE_GAP),
        ) else {
            return Err(fail(attempt, "no room for a distractor label"));
        };
        let y0 = l.r + 2 + 8;
        l.occupied.push((x, x + tw as i32 - 1));
        distractors.push((
            text,
            BBox::new(x, y0, x + tw as i32 - 1, y0 + th as i32 - 1),
        ));
    }

    Ok(Layout {
        tags,
        hlines,
        vlines,
        codes,
        distractors,
        symbols,
    })
}

/// Presence of ink on each window edge (top, right, bottom, left), checked
/// pixel by pixel; independent of the run-based detector.
pub fn pixel_crossing_oracle(image: &BinaryImage, at: Point, side: usize) -> [bool; 4] {
    let (cx, cy) = (at.x.round() as i64, at.y.round() as i64);
    let r = (side / 2) as i64;
    let mut hit = [false; 4];
    for k in -r..=r {
        hit[0] |= image.at(cx + k, cy - r);
        hit[1] |= image.at(cx + r, cy + k);
        hit[2] |= image.at(cx + k, cy + r);
        hit[3] |= image.at(cx - r, cy + k);
    }
    hit
}

fn edge_runs(image: &BinaryImage, at: Point, side: usize) -> [usize; 4] {
    let (cx, cy) = (at.x.round() as i64, at.y.round() as i64);
    let r = (side / 2) as i64;
    let mut ink = [const { Vec::new() }; 4];
    for k in -r..=r {
        ink[0].push(image.at(cx + k, cy - r));
        ink[1].push(image.at(cx + r, cy + k));
        ink[2].push(image.at(cx + k, cy + r));
        ink[3].push(image.at(cx - r, cy + k));
    }
    ink.map(|e: Vec<bool>| {
        e.iter()
            .enumerate()
            .filter(|&(i, &v)| v && (i == 0 || !e[i - 1]))
            .count()
    })
}

fn cut_gaps(
    lines: &mut BinaryImage,
    segments: &[Segment],
    junctions: &[Point],
    n: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
) {
    if segments.is_empty() || n == 0 {
        return;
    }
    let half_window = (WINDOW / 2) as f64;
    for _ in 0..count {
        let s = segments[rng.random_range(0..segments.len())];
        let dir = s.dir();
        let len = s.length();
        let on_segment: Vec<&Point> = junctions.iter().filter(|j| s.dist_to(**j) < 1.0).collect();
        // Half the gaps straddle a junction window edge so an arm disappears.
        let t = match on_segment.choose(rng) {
            Some(j) if rng.random_bool(0.5) => {
                let along = j.sub(s.p).dot(dir);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                along + sign * half_window
            }
            _ => rng.random_range(0.0..len),
        };
        let centre = s.p.add(dir.scale(t));
        let normal = Point::new(-dir.y, dir.x);
        let half = n as f64 / 2.0;
        let b = BBox::around(&[centre])
            .unwrap_or_default()
            .expand(n as i32 + 3);
        if let Some(b) = b.clip(lines.width(), lines.height()) {
            for y in b.y0..=b.y1 {
                for x in b.x0..=b.x1 {
                    let d = Point::new(x as f64, y as f64).sub(centre);
                    if d.dot(dir).abs() <= half && d.dot(normal).abs() <= 2.5 {
                        lines.set(x as usize, y as usize, false);
                    }
                }
            }
        }
    }
}

/// Renders a sheet and its ground truth; identical `(spec, seed)` pairs give
/// identical output.
pub fn generate_sheet(spec: &SheetSpec, seed: u64) -> Result<(GrayImage, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = None;
    for attempt in 1..=spec.max_attempts {
        match layout(spec, &mut rng, attempt) {
            Ok(l) => {
                let out = render(spec, l, &mut rng)?;
                match spec.junctions {
                    Some(want) if out.1.graph.junctions.len() != want => {
                        last = Some(fail(
                            attempt,
                            format!(
                                "layout has {} junctions, spec asks for {want}",
                                out.1.graph.junctions.len()
                            ),
                        ));
                    }
                    _ => return Ok(out),
                }
            }
            Err(e) => last = Some(e),
        }
    }
    let reason = match last {
        Some(Error::Generation { reason, .. }) => reason,
        Some(e) => e.to_string(),
        None => "no attempt made".into(),
    };
    Err(fail(spec.max_attempts, reason))
}

fn render(spec: &SheetSpec, l: Layout, rng: &mut ChaCha8Rng) -> Result<(GrayImage, GroundTruth)> {
    let (w, h) = (spec.width, spec.height);
    let mut lines = BinaryImage::new(w, h)?;

    // Ground-truth centerlines, renumbered top-to-bottom then left-to-right.
    let mut raw: Vec<(Point, Point, Option<usize>)> = Vec::new();
    for (i, hl) in l.hlines.iter().enumerate() {
        draw::fill_rect(
            &mut lines,
            BBox::new(hl.xa, hl.r, hl.xb, hl.r + THICKNESS - 1),
        );
        let y = hl.r as f64 + 0.5;
        raw.push((
            Point::new(hl.xa as f64, y),
            Point::new(hl.xb as f64, y),
            Some(i),
        ));
    }
    for vl in &l.vlines {
        draw::fill_rect(
            &mut lines,
            BBox::new(vl.x, vl.ya, vl.x + THICKNESS - 1, vl.yb),
        );
        let x = vl.x as f64 + 0.5;
        raw.push((
            Point::new(x, vl.ya as f64),
            Point::new(x, vl.yb as f64),
            None,
        ));
    }
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| {
        let key = |i: usize| {
            let (p, q, _) = raw[i];
            (p.y.min(q.y), p.x.min(q.x))
        };
        key(a).partial_cmp(&key(b)).expect("finite")
    });
    let mut line_id = vec![0usize; l.hlines.len()];
    let segments: Vec<Segment> = order
        .iter()
        .enumerate()
        .map(|(id, &i)| {
            let (p, q, hl) = raw[i];
            if let Some(hl) = hl {
                line_id[hl] = id;
            }
            Segment::new(id, p, q)
        })
        .collect();

    let candidates = compute_intersections(&segments);
    if let Noise::BreakGaps { n, count } = spec.noise {
        let points: Vec<Point> = candidates.iter().map(|c| c.at).collect();
        cut_gaps(&mut lines, &segments, &points, n, count, rng);
    }
    let junctions: Vec<Junction> = candidates
        .iter()
        .map(|c| {
            let hit = pixel_crossing_oracle(&lines, c.at, WINDOW);
            let arm_count = hit.iter().filter(|&&b| b).count();
            Junction {
                at: c.at,
                segments: c.segments,
                arm_count,
                crossings: edge_runs(&lines, c.at, WINDOW),
                valid: arm_count >= 3,
            }
        })
        .collect();

    let mut sheet = lines.clone();
    for t in &l.tags {
        draw::outline_polygon(&mut sheet, &t.vertices, 2.0);
    }
    let mut codes = Vec::new();
    let mut text_regions = Vec::new();
    let mut associations = Vec::new();
    for (i, t) in l.tags.iter().enumerate() {
        let hl = l
            .hlines
            .iter()
            .position(|hl| hl.tags.contains(&i))
            .expect("every tag has a line");
        let s = &segments[line_id[hl]];
        associations.push(Association {
            component: ComponentRef::Tag(i),
            line: s.id,
            distance: s.dist_to(t.emerge),
        });
    }
    for (code, hl) in &l.codes {
        let bbox = font::draw_text(
            &mut sheet,
            &code.text,
            code.bbox.x0 as i64,
            code.bbox.y0 as i64,
            spec.text_scale,
        )
        .expect("code lies on the sheet");
        let s = &segments[line_id[*hl]];
        associations.push(Association {
            component: ComponentRef::Code(codes.len()),
            line: s.id,
            distance: bbox
                .corners()
                .iter()
                .map(|&c| s.dist_to(c))
                .fold(f64::INFINITY, f64::min),
        });
        codes.push(PipelineCode {
            text: code.text.clone(),
            bbox,
        });
        text_regions.push(TextRegion {
            bbox,
            text: Some(code.text.clone()),
            confidence: Some(1.0),
        });
    }
    for (text, b) in &l.distractors {
        let bbox = font::draw_text(&mut sheet, text, b.x0 as i64, b.y0 as i64, spec.text_scale)
            .expect("label lies on the sheet");
        text_regions.push(TextRegion {
            bbox,
            text: Some(text.clone()),
            confidence: Some(1.0),
        });
    }
    let mut symbols = Vec::new();
    for (i, (det, hl)) in l.symbols.iter().enumerate() {
        let glyph = render_symbol(det.class);
        for y in 0..glyph.height() {
            for x in 0..glyph.width() {
                if glyph.get(x, y) {
                    sheet.put(
                        det.bbox.x0 as i64 + x as i64,
                        det.bbox.y0 as i64 + y as i64,
                        true,
                    );
                }
            }
        }
        let s = &segments[line_id[*hl]];
        associations.push(Association {
            component: ComponentRef::Symbol(i),
            line: s.id,
            distance: s.dist_to(det.bbox.center()),
        });
        symbols.push(*det);
    }
    if let Noise::Speckle { p } = spec.noise {
        for y in 0..h {
            for x in 0..w {
                if rng.random_bool(p) {
                    sheet.set(x, y, true);
                }
            }
        }
    }

    let tag_assocs: Vec<Association> = associations
        .iter()
        .filter(|a| matches!(a.component, ComponentRef::Tag(_)))
        .copied()
        .collect();
    let forest = prune_forest(&build_forest(&l.tags, &tag_assocs, &junctions, &segments));
    let parts = Components {
        codes,
        tags: l.tags,
        segments,
        junctions,
        symbols,
        associations,
    };
    let mut graph = PidGraph::assemble((w, h), parts, forest, Report::default());
    graph.ground_truth = true;
    Ok((
        sheet.to_gray(),
        GroundTruth {
            graph,
            text_regions,
        },
    ))
}

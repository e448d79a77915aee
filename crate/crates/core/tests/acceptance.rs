//! One pass/fail line per headline criterion. Runs without the libtest
//! harness so the report is always printed.

mod common;

use std::time::{Duration, Instant};

use pidgraph::config::Config;
use pidgraph::draw;
use pidgraph::eval::{evaluate, percent_tenths, ConfusionMatrix, EvalParams};
use pidgraph::geom::{line_intersection, BBox, Point};
use pidgraph::lines::{compute_intersections, validate_intersection, JunctionCandidate, Segment};
use pidgraph::pipeline::{extract, ExtractInputs};
use pidgraph::raster::{BinaryImage, GrayImage};
use pidgraph::symbols::{
    augment_patches, export_mask_boundaries, tile_sheet, AnnotationConfig, Augmentation, Patch,
};
use pidgraph::synth::{generate_sheet, pixel_crossing_oracle, SheetSpec};
use pidgraph::tags::{extract_contours, simplify_rdp, ContourKind, Polyline, TagParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------- metrics

fn metric_arithmetic() -> Outcome {
    // (successful, total, reported value in tenths of a percent, tolerance in tenths)
    let rows = [
        (64, 71, 901, 1),
        (47, 72, 652, 1),
        (21, 21, 1000, 1),
        (32, 32, 1000, 1),
        (41, 64, 640, 1),
        (14, 21, 665, 2),
        (31, 32, 968, 1),
    ];
    let mut bad = Vec::new();
    for (s, t, reported, tol) in rows {
        let got = percent_tenths(s, t).expect("non-empty total");
        if got.abs_diff(reported) > tol {
            bad.push(format!("{s}/{t}: {got} vs {reported}"));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "7/7 rows".into()
        } else {
            bad.join(", ")
        },
    )
}

const PUBLISHED_CONFUSION: [[u64; 11]; 11] = [
    [74, 2, 0, 0, 0, 0, 0, 4, 0, 0, 0],
    [0, 64, 0, 0, 4, 0, 0, 0, 0, 0, 0],
    [0, 0, 25, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 294, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 38, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 41, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 8, 36, 0, 0, 3, 0],
    [5, 0, 0, 3, 0, 0, 0, 64, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 261, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 52, 0],
    [0, 0, 3, 0, 0, 0, 0, 0, 4, 0, 149],
];

// (precision, recall, f1) as published
const PUBLISHED_SCORES: [(f64, f64, f64); 11] = [
    (0.925, 0.936, 0.931),
    (0.941, 0.969, 0.955),
    (1.0, 0.893, 0.944),
    (1.0, 0.989, 0.995),
    (1.0, 0.905, 0.95),
    (0.976, 0.837, 0.901),
    (0.766, 1.0, 0.867),
    (0.888, 0.941, 0.914),
    (1.0, 0.985, 0.992),
    (1.0, 0.929, 0.963),
    (0.955, 1.0, 0.977),
];

fn per_class_scores() -> Outcome {
    let m = ConfusionMatrix::from_counts(PUBLISHED_CONFUSION);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (s, &(p, r, f)) in m.scores().iter().zip(&PUBLISHED_SCORES) {
        // published precision is row-normalized, recall column-normalized
        for (ours, theirs) in [(s.recall, p), (s.precision, r), (s.f1, f)] {
            worst = worst.max((ours - theirs).abs());
            checked += 1;
        }
    }
    outcome(
        checked == 33 && worst <= 0.001,
        format!("{checked} entries, max deviation {worst:.4}"),
    )
}

// ---------------------------------------------------------------- end to end

fn synthetic_end_to_end() -> Outcome {
    let spec = SheetSpec::default();
    let config = Config::default();
    let params = EvalParams {
        iou: 0.7,
        endpoint_tol: 3.0,
    };
    let (mut tag_hit, mut tag_pred, mut tag_total) = (0, 0, 0);
    let (mut code_hit, mut code_pred, mut code_total) = (0, 0, 0);
    let (mut seg_hit, mut seg_total) = (0, 0);
    let mut forests = 0;
    let sheets = 50;
    for seed in 0..sheets {
        let (image, truth) = generate_sheet(&spec, seed).expect("default spec generates");
        let inputs = ExtractInputs {
            text_regions: Some(truth.text_regions.clone()),
            symbols: None,
        };
        let pred = extract(&image, &inputs, &config).expect("extraction succeeds");
        let m = evaluate(&pred, &truth.graph, &params);
        let row = |n: &str| m.row(n).expect("row present").clone();
        for r in [row("Outlet Detection"), row("Inlet Detection")] {
            tag_hit += r.successful;
            tag_total += r.total;
            tag_pred += r.predicted.unwrap_or(0);
        }
        let c = row("Pipeline-Code Detection");
        code_hit += c.successful;
        code_total += c.total;
        code_pred += c.predicted.unwrap_or(0);
        let s = row("Pipeline Detection");
        seg_hit += s.successful;
        seg_total += s.total;
        forests += m.forest_equal as usize;
    }
    let ratio = |a: usize, b: usize| a as f64 / b as f64;
    let (tp, tr) = (ratio(tag_hit, tag_pred), ratio(tag_hit, tag_total));
    let (cp, cr) = (ratio(code_hit, code_pred), ratio(code_hit, code_total));
    let sr = ratio(seg_hit, seg_total);
    let fr = ratio(forests, sheets as usize);
    outcome(
        tp == 1.0 && tr == 1.0 && cp == 1.0 && cr == 1.0 && sr >= 0.95 && fr >= 0.9,
        format!(
            "tags P={tp:.3} R={tr:.3}, codes P={cp:.3} R={cr:.3}, segment recall {sr:.3}, forests {forests}/{sheets}"
        ),
    )
}

// ---------------------------------------------------------------- junctions

/// A random junction drawing: arms leave the centre at roughly the four
/// compass directions; some are omitted or interrupted.
fn random_junction(rng: &mut ChaCha8Rng) -> (BinaryImage, Point) {
    let mut img = BinaryImage::new(64, 64).unwrap();
    let centre = Point::new(
        32.0 + rng.random_range(-1.5..1.5),
        32.0 + rng.random_range(-1.5..1.5),
    );
    let radius = rng.random_range(0.5..1.6);
    let tilt = rng.random_range(-0.15..0.15);
    let kind = rng.random_range(0..3);
    // arm gap as (start, end) distance from the centre, if any
    let mut gaps = [None; 4];
    let mut present = [true; 4];
    match kind {
        0 => {}
        1 => present[rng.random_range(0..4)] = false,
        _ => {
            let axis = rng.random_range(0..2);
            let g = rng.random_range(2.0..16.0);
            for arm in [axis, axis + 2] {
                gaps[arm] = Some((0.0, g + rng.random_range(-1.0..1.0)));
            }
        }
    }
    for arm in 0..4 {
        if !present[arm] {
            continue;
        }
        let angle = tilt + arm as f64 * std::f64::consts::FRAC_PI_2 + rng.random_range(-0.05..0.05);
        let dir = Point::new(angle.cos(), angle.sin());
        let len: f64 = rng.random_range(6.0..30.0);
        let (from, to) = match gaps[arm] {
            Some((_, g)) => (g, len.max(g + 1.0)),
            None => (0.0, len),
        };
        draw::stroke(
            &mut img,
            centre.add(dir.scale(from)),
            centre.add(dir.scale(to)),
            radius,
        );
    }
    (img, centre)
}

fn junction_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut agree, mut valid, mut total) = (0, 0, 0);
    for _ in 0..1000 {
        let (img, at) = random_junction(&mut rng);
        let j = validate_intersection(
            &img,
            &JunctionCandidate {
                at,
                segments: (0, 1),
            },
            21,
        );
        let hits = pixel_crossing_oracle(&img, at, 21)
            .iter()
            .filter(|&&h| h)
            .count();
        total += 1;
        valid += (hits >= 3) as usize;
        if j.arm_count == hits && j.valid == (hits >= 3) {
            agree += 1;
        }
    }
    outcome(
        agree == total && valid > 0 && valid < total,
        format!(
            "{agree}/{total} agree ({valid} valid, {} invalid)",
            total - valid
        ),
    )
}

// ---------------------------------------------------------------- forests

fn forest_suite() -> Outcome {
    let mut failures = Vec::new();
    let mut cyclic = 0;
    for seed in 0..500 {
        let case = common::GraphCase::random(seed);
        cyclic += case.has_cycle() as usize;
        if let Err(e) = case.check() {
            failures.push(format!("seed {seed}: {e}"));
        }
    }
    outcome(
        failures.is_empty() && cyclic > 0,
        if failures.is_empty() {
            format!("500 graphs ({cyclic} cyclic)")
        } else {
            failures[..failures.len().min(3)].join("; ")
        },
    )
}

// ---------------------------------------------------------------- geometry

fn outer_vertex_count(img: &BinaryImage) -> usize {
    let eps = TagParams::default().epsilon_frac;
    let c = extract_contours(img)
        .into_iter()
        .find(|c| c.kind == ContourKind::Outer)
        .expect("one outer contour");
    simplify_rdp(&c.polyline, eps * c.polyline.length())
        .points
        .len()
}

fn geometry() -> Outcome {
    let mut notes = Vec::new();

    let mut square = BinaryImage::new(40, 40).unwrap();
    draw::fill_rect(&mut square, BBox::new(10, 10, 29, 29));
    let sq = outer_vertex_count(&square);
    notes.push(format!("square {sq}"));

    let mut pent = BinaryImage::new(140, 50).unwrap();
    let poly = [
        Point::new(10.0, 10.0),
        Point::new(90.0, 10.0),
        Point::new(120.0, 25.0),
        Point::new(90.0, 40.0),
        Point::new(10.0, 40.0),
    ];
    draw::fill_polygon(&mut pent, &poly);
    let pe = outer_vertex_count(&pent);
    notes.push(format!("pentagon {pe}"));

    let straight = Polyline::open(
        (0..50)
            .map(|i| Point::new(i as f64 * 2.0, 3.0 + i as f64))
            .collect(),
    );
    let st = simplify_rdp(&straight, 1.0).points.len();
    notes.push(format!("straight {st}"));

    let exact = line_intersection(
        Point::new(0.0, 0.0),
        Point::new(10.0, 10.0),
        Point::new(0.0, 10.0),
        Point::new(10.0, 0.0),
    )
    .map(|(p, _, _)| p);
    let cands = compute_intersections(&[
        Segment::new(0, Point::new(0.0, 0.0), Point::new(10.0, 10.0)),
        Segment::new(1, Point::new(0.0, 10.0), Point::new(10.0, 0.0)),
    ]);
    let exact_ok = exact == Some(Point::new(5.0, 5.0))
        && cands.len() == 1
        && cands[0].at == Point::new(5.0, 5.0);

    // Non-overlapping pairs: the infinite lines meet at `x`, which lies at
    // least 3 px beyond the end of the first segment.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rejected = 0;
    for _ in 0..100 {
        let x = Point::new(rng.random_range(20.0..80.0), rng.random_range(20.0..80.0));
        let a_ang: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let b_ang = a_ang + rng.random_range(0.3..2.8);
        let (da, db) = (
            Point::new(a_ang.cos(), a_ang.sin()),
            Point::new(b_ang.cos(), b_ang.sin()),
        );
        let s0 = rng.random_range(3.0..20.0);
        let s1 = s0 + rng.random_range(5.0..40.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let a = Segment::new(0, x.add(da.scale(sign * s0)), x.add(da.scale(sign * s1)));
        let t0 = rng.random_range(-30.0..10.0);
        let b = Segment::new(
            1,
            x.add(db.scale(t0)),
            x.add(db.scale(t0 + rng.random_range(5.0..40.0))),
        );
        // analytic oracle: parameter of the meeting point along each segment
        let param = |s: &Segment| {
            let d = s.q.sub(s.p);
            x.sub(s.p).dot(d) / d.dot(d)
        };
        let off_a = {
            let t = param(&a);
            !(0.0..=1.0).contains(&t) && (a.p.dist(x).min(a.q.dist(x)) >= 3.0)
        };
        assert!(off_a, "fixture construction");
        if compute_intersections(&[a, b]).is_empty() {
            rejected += 1;
        }
    }

    let passed = sq == 4 && pe == 5 && st == 2 && exact_ok && rejected == 100;
    notes.push(format!("exact (5,5) {exact_ok}"));
    notes.push(format!("rejected {rejected}/100"));
    outcome(passed, notes.join(", "))
}

// ---------------------------------------------------------------- annotation

fn checksum(patches: &[Patch]) -> String {
    let mut h = Sha256::new();
    for p in patches {
        h.update((p.offset_x as u64).to_le_bytes());
        h.update((p.offset_y as u64).to_le_bytes());
        h.update([p.transform.quarter_turns]);
        h.update(p.transform.dx.to_le_bytes());
        h.update(p.transform.dy.to_le_bytes());
        h.update(p.image.luma());
        if let Some(a) = &p.annotation {
            h.update(a.ink().iter().map(|&b| b as u8).collect::<Vec<_>>());
        }
    }
    hex::encode(h.finalize())
}

/// Boundary = mask minus its 3x3 erosion, then a `d`x`d` dilation, computed
/// pixel by pixel.
fn boundary_oracle(mask: &BinaryImage, d: usize) -> BinaryImage {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut edge = BinaryImage::new(mask.width(), mask.height()).unwrap();
    for y in 0..h {
        for x in 0..w {
            if !mask.at(x, y) {
                continue;
            }
            let interior = (-1..=1).all(|dy| (-1..=1).all(|dx| mask.at(x + dx, y + dy)));
            edge.put(x, y, !interior);
        }
    }
    let r = (d / 2) as i64;
    let mut out = BinaryImage::new(mask.width(), mask.height()).unwrap();
    for y in 0..h {
        for x in 0..w {
            let hit = (-r..=r).any(|dy| (-r..=r).any(|dx| edge.at(x + dx, y + dy)));
            out.put(x, y, hit);
        }
    }
    out
}

fn annotation() -> Outcome {
    let mut fails = Vec::new();
    let cfg = AnnotationConfig::default();
    let sheet = |w, h| {
        let mut g = GrayImage::filled(w, h, 255).unwrap();
        for y in 0..h {
            for x in 0..w {
                g.set(x, y, ((x * 7 + y * 13) % 251) as u8);
            }
        }
        g
    };

    let four = tile_sheet(&sheet(800, 800), None, &cfg).unwrap();
    let nine = tile_sheet(&sheet(900, 900), None, &cfg).unwrap();
    let one = tile_sheet(&sheet(400, 400), None, &cfg).unwrap();
    let offs = |p: &[Patch]| {
        p.iter()
            .map(|p| (p.offset_x, p.offset_y))
            .collect::<std::collections::BTreeSet<_>>()
    };
    if four.len() != 4 || offs(&four) != [(0, 0), (400, 0), (0, 400), (400, 400)].into() {
        fails.push("800x800 tiling".to_string());
    }
    let src = sheet(900, 900);
    let padded_ok = nine.len() == 9
        && nine.iter().all(|p| {
            (0..400).all(|y| {
                (0..400).all(|x| {
                    let (sx, sy) = (p.offset_x + x, p.offset_y + y);
                    let want = if sx < 900 && sy < 900 {
                        src.get(sx, sy)
                    } else {
                        255
                    };
                    p.image.get(x, y) == want
                })
            })
        });
    if !padded_ok {
        fails.push("900x900 tiling".into());
    }
    if one.len() != 1
        || (one[0].offset_x, one[0].offset_y) != (0, 0)
        || one[0].image != sheet(400, 400)
    {
        fails.push("400x400 tiling".into());
    }

    let mut square = BinaryImage::new(50, 50).unwrap();
    draw::fill_rect(&mut square, BBox::new(10, 10, 29, 29));
    let b = export_mask_boundaries(&square, &cfg).unwrap();
    let mut ring = BinaryImage::new(50, 50).unwrap();
    draw::fill_rect(&mut ring, BBox::new(9, 9, 30, 30));
    let mut hole = BinaryImage::new(50, 50).unwrap();
    draw::fill_rect(&mut hole, BBox::new(12, 12, 27, 27));
    let ring = ring.and_not(&hole);
    if b != boundary_oracle(&square, 3) || b != ring {
        fails.push("square boundary".into());
    }
    let empty = BinaryImage::new(50, 50).unwrap();
    if !export_mask_boundaries(&empty, &cfg).unwrap().is_empty() {
        fails.push("empty boundary".into());
    }
    let mut dot = BinaryImage::new(9, 9).unwrap();
    dot.set(4, 4, true);
    let mut block = BinaryImage::new(9, 9).unwrap();
    draw::fill_rect(&mut block, BBox::new(3, 3, 5, 5));
    if export_mask_boundaries(&dot, &cfg).unwrap() != block {
        fails.push("single-pixel boundary".into());
    }

    let mut both = cfg.clone();
    both.augmentations = [Augmentation::Translation, Augmentation::Rotation]
        .into_iter()
        .collect();
    let base = tile_sheet(&sheet(400, 400), Some(&square_mask(400)), &both).unwrap();
    let a = augment_patches(&base, &both, 99).unwrap();
    let b2 = augment_patches(&base, &both, 99).unwrap();
    if a.len() != 9 {
        fails.push(format!("augmented count {}", a.len()));
    }
    let (ca, cb) = (checksum(&a), checksum(&b2));
    if ca != cb {
        fails.push("augmentation not deterministic".into());
    }
    let identity = augment_patches(&base, &cfg, 99).unwrap();
    if checksum(&identity) != checksum(&base) {
        fails.push("empty augmentation set changed patches".into());
    }
    outcome(
        fails.is_empty(),
        if fails.is_empty() {
            format!(
                "tiling, boundaries and augmentation exact; checksum {}",
                &ca[..16]
            )
        } else {
            fails.join(", ")
        },
    )
}

fn square_mask(side: usize) -> BinaryImage {
    let mut m = BinaryImage::new(side, side).unwrap();
    draw::fill_rect(&mut m, BBox::new(100, 120, 180, 200));
    m
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 7] = [
        (
            "metric arithmetic",
            metric_arithmetic,
            Duration::from_secs(1),
        ),
        (
            "confusion matrix to per-class scores",
            per_class_scores,
            Duration::from_secs(1),
        ),
        (
            "synthetic end-to-end (50 sheets)",
            synthetic_end_to_end,
            Duration::from_secs(60),
        ),
        (
            "junction validation vs pixel oracle",
            junction_oracle,
            Duration::from_secs(10),
        ),
        (
            "forest invariants (500 graphs)",
            forest_suite,
            Duration::from_secs(30),
        ),
        ("geometry properties", geometry, Duration::MAX),
        ("annotation tooling", annotation, Duration::MAX),
    ];
    let mut all = true;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let in_time = took <= budget;
        let ok = o.passed && in_time;
        all &= ok;
        let limit = if budget == Duration::MAX {
            String::new()
        } else {
            format!(" (limit {budget:?})")
        };
        println!(
            "{} {name}: {} [{took:.2?}{limit}]",
            if ok { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if !all {
        std::process::exit(1);
    }
}

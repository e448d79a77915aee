//! Pipeline segments and their intersections.
//!
//! Segments come from a progressive probabilistic Hough transform over the
//! skeleton, then collinear fragments are merged. Every pair of segments is
//! intersected analytically and each finite crossing is checked against the
//! ink with a square window: ink leaving through three or four window edges is
//! a real junction, ink through two opposite edges only is one pipe passing a
//! gap in the other.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{line_intersection, point_line_dist, Point};
use crate::raster::BinaryImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: usize,
    pub p: Point,
    pub q: Point,
}

impl Segment {
    pub fn new(id: usize, p: Point, q: Point) -> Self {
        Self { id, p, q }
    }

    pub fn length(&self) -> f64 {
        self.p.dist(self.q)
    }

    pub fn dir(&self) -> Point {
        let d = self.q.sub(self.p);
        d.scale(1.0 / d.norm())
    }

    pub fn dist_to(&self, pt: Point) -> f64 {
        crate::geom::point_segment_dist(pt, self.p, self.q)
    }

    /// Endpoint ordering used for stable output: smaller `x`, then smaller `y`, first.
    fn normalized(mut self) -> Self {
        if (self.q.x, self.q.y) < (self.p.x, self.p.y) {
            std::mem::swap(&mut self.p, &mut self.q);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoughParams {
    pub rho: f64,
    /// Angular resolution in degrees.
    pub theta: f64,
    pub votes: u32,
    pub min_line_length: u32,
    pub max_line_gap: u32,
    /// Seed for the point visiting order.
    pub seed: u64,
}

impl Default for HoughParams {
    fn default() -> Self {
        Self {
            rho: 1.0,
            theta: 1.0,
            votes: 50,
            min_line_length: 50,
            max_line_gap: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MergeParams {
    /// Degrees.
    pub angle_tol: f64,
    pub gap_tol: f64,
    pub offset_tol: f64,
}

impl Default for MergeParams {
    fn default() -> Self {
        Self {
            angle_tol: 1.5,
            gap_tol: 5.0,
            offset_tol: 2.0,
        }
    }
}

/// Progressive probabilistic Hough transform.
///
/// Points are visited in a seeded random order. Each vote that lifts a bin
/// over the threshold triggers a walk along that line in both directions,
/// bridging gaps up to `max_line_gap`; long enough walks become segments and
/// their pixels withdraw their votes.
pub fn probabilistic_hough(image: &BinaryImage, params: &HoughParams) -> Vec<(Point, Point)> {
    let (w, h) = (image.width() as i64, image.height() as i64);
    let irho = 1.0 / params.rho;
    let theta = params.theta.to_radians();
    let numangle = (std::f64::consts::PI / theta).round().max(1.0) as usize;
    let numrho = (((w + h) * 2 + 1) as f64 / params.rho).round() as usize;
    let trig: Vec<(f64, f64)> = (0..numangle)
        .map(|n| {
            let a = n as f64 * theta;
            (a.cos() * irho, a.sin() * irho)
        })
        .collect();

    let mut acc = vec![0i32; numangle * numrho];
    let mut mask: Vec<bool> = image.ink().to_vec();
    let mut points: Vec<(i64, i64)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| mask[(y * w + x) as usize])
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    points.shuffle(&mut rng);

    let rbin = |n: usize, x: i64, y: i64| -> usize {
        let r = (x as f64 * trig[n].0 + y as f64 * trig[n].1).round() as i64;
        (r + (numrho as i64 - 1) / 2) as usize
    };

    const SHIFT: i64 = 16;
    let mut lines = Vec::new();
    for &(px, py) in &points {
        if !mask[(py * w + px) as usize] {
            continue;
        }
        let (mut max_val, mut max_n) = (params.votes as i32 - 1, None);
        for n in 0..numangle {
            let cell = &mut acc[n * numrho + rbin(n, px, py)];
            *cell += 1;
            if *cell > max_val {
                max_val = *cell;
                max_n = Some(n);
            }
        }
        let Some(max_n) = max_n else {
            continue;
        };

        // direction along the line
        let a = -trig[max_n].1;
        let b = trig[max_n].0;
        let xflag = a.abs() > b.abs();
        let (x0, y0, dx0, dy0) = if xflag {
            let dx0 = if a > 0.0 { 1 } else { -1 };
            let dy0 = (b * (1i64 << SHIFT) as f64 / a.abs()).round() as i64;
            (px, (py << SHIFT) + (1 << (SHIFT - 1)), dx0, dy0)
        } else {
            let dy0 = if b > 0.0 { 1 } else { -1 };
            let dx0 = (a * (1i64 << SHIFT) as f64 / b.abs()).round() as i64;
            ((px << SHIFT) + (1 << (SHIFT - 1)), py, dx0, dy0)
        };
        let pix = |x: i64, y: i64| {
            if xflag {
                (x, y >> SHIFT)
            } else {
                (x >> SHIFT, y)
            }
        };

        let mut ends = [(px, py); 2];
        for (k, end) in ends.iter_mut().enumerate() {
            let (dx, dy) = if k == 0 { (dx0, dy0) } else { (-dx0, -dy0) };
            let (mut x, mut y, mut gap) = (x0, y0, 0u32);
            loop {
                let (j, i) = pix(x, y);
                if j < 0 || j >= w || i < 0 || i >= h {
                    break;
                }
                if mask[(i * w + j) as usize] {
                    gap = 0;
                    *end = (j, i);
                } else {
                    gap += 1;
                    if gap > params.max_line_gap {
                        break;
                    }
                }
                x += dx;
                y += dy;
            }
        }

        let good = (ends[1].0 - ends[0].0).abs() >= params.min_line_length as i64
            || (ends[1].1 - ends[0].1).abs() >= params.min_line_length as i64;

        for (k, end) in ends.iter().enumerate() {
            let (dx, dy) = if k == 0 { (dx0, dy0) } else { (-dx0, -dy0) };
            let (mut x, mut y) = (x0, y0);
            loop {
                let (j, i) = pix(x, y);
                if j < 0 || j >= w || i < 0 || i >= h {
                    break;
                }
                let idx = (i * w + j) as usize;
                if mask[idx] {
                    if good {
                        for n in 0..numangle {
                            acc[n * numrho + rbin(n, j, i)] -= 1;
                        }
                    }
                    mask[idx] = false;
                }
                if (j, i) == *end {
                    break;
                }
                x += dx;
                y += dy;
            }
        }

        if good {
            lines.push((
                Point::new(ends[0].0 as f64, ends[0].1 as f64),
                Point::new(ends[1].0 as f64, ends[1].1 as f64),
            ));
        }
    }
    lines
}

fn angle_between(a: Point, b: Point) -> f64 {
    // undirected lines: fold into [0, 90]
    let cos = (a.dot(b) / (a.norm() * b.norm())).abs().min(1.0);
    cos.acos().to_degrees()
}

fn mergeable(a: &Segment, b: &Segment, params: &MergeParams) -> bool {
    if angle_between(a.q.sub(a.p), b.q.sub(b.p)) > params.angle_tol {
        return false;
    }
    let offset = point_line_dist(b.p, a.p, a.q)
        .max(point_line_dist(b.q, a.p, a.q))
        .min(point_line_dist(a.p, b.p, b.q).max(point_line_dist(a.q, b.p, b.q)));
    if offset > params.offset_tol {
        return false;
    }
    let d = a.dir();
    let ta = (0.0, a.q.sub(a.p).dot(d));
    let (tb0, tb1) = (b.p.sub(a.p).dot(d), b.q.sub(a.p).dot(d));
    let tb = (tb0.min(tb1), tb0.max(tb1));
    let gap = (tb.0 - ta.1).max(ta.0 - tb.1);
    gap <= params.gap_tol
}

fn span(group: &[Segment]) -> (Point, Point) {
    let longest = group
        .iter()
        .max_by(|a, b| a.length().total_cmp(&b.length()))
        .expect("non-empty group");
    let d = longest.dir();
    let total: f64 = group.iter().map(Segment::length).sum();
    let centroid = group
        .iter()
        .fold(Point::default(), |acc, s| {
            acc.add(s.p.add(s.q).scale(0.5 * s.length()))
        })
        .scale(1.0 / total);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in group {
        for e in [s.p, s.q] {
            let t = e.sub(centroid).dot(d);
            lo = lo.min(t);
            hi = hi.max(t);
        }
    }
    (centroid.add(d.scale(lo)), centroid.add(d.scale(hi)))
}

/// Replaces chains of near-collinear, near-touching segments with their
/// spanning segment and renumbers by (min y, min x).
pub fn merge_collinear(segments: &[Segment], params: &MergeParams) -> Vec<Segment> {
    let mut current: Vec<Segment> = segments
        .iter()
        .copied()
        .filter(|s| s.length() > 0.0)
        .collect();
    loop {
        let n = current.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut joined = false;
        for i in 0..n {
            for j in i + 1..n {
                if mergeable(&current[i], &current[j], params) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                        joined = true;
                    }
                }
            }
        }
        if !joined {
            break;
        }
        let mut groups: Vec<Vec<Segment>> = vec![Vec::new(); n];
        for (i, &s) in current.iter().enumerate() {
            let r = find(&mut parent, i);
            groups[r].push(s);
        }
        current = groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|g| {
                if g.len() == 1 {
                    g[0]
                } else {
                    let (p, q) = span(&g);
                    Segment::new(0, p, q)
                }
            })
            .collect();
    }
    renumber(current)
}

fn renumber(segments: Vec<Segment>) -> Vec<Segment> {
    let mut segs: Vec<Segment> = segments.into_iter().map(Segment::normalized).collect();
    segs.sort_by(|a, b| {
        let ka = (
            a.p.y.min(a.q.y),
            a.p.x.min(a.q.x),
            a.p.y.max(a.q.y),
            a.p.x.max(a.q.x),
        );
        let kb = (
            b.p.y.min(b.q.y),
            b.p.x.min(b.q.x),
            b.p.y.max(b.q.y),
            b.p.x.max(b.q.x),
        );
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.total_cmp(&kb.2))
            .then(ka.3.total_cmp(&kb.3))
    });
    segs.into_iter()
        .enumerate()
        .map(|(id, s)| Segment { id, ..s })
        .collect()
}

/// Hough on the skeleton followed by collinear merging.
pub fn detect_segments(
    skeleton: &BinaryImage,
    hough: &HoughParams,
    merge: &MergeParams,
) -> Vec<Segment> {
    let raw: Vec<Segment> = probabilistic_hough(skeleton, hough)
        .into_iter()
        .map(|(p, q)| Segment::new(0, p, q))
        .collect();
    merge_collinear(&raw, merge)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionCandidate {
    pub at: Point,
    pub segments: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub at: Point,
    pub segments: (usize, usize),
    /// Number of window edges (of 4) crossed by ink.
    pub arm_count: usize,
    /// Ink runs on the top, right, bottom and left window edges.
    pub crossings: [usize; 4],
    pub valid: bool,
}

/// Pairwise analytic intersections that lie on both finite segments (1 px slack).
pub fn compute_intersections(segments: &[Segment]) -> Vec<JunctionCandidate> {
    let mut out = Vec::new();
    for (i, a) in segments.iter().enumerate() {
        for b in &segments[i + 1..] {
            if let Some(c) = intersect_pair(a, b) {
                out.push(c);
            }
        }
    }
    out
}

fn intersect_pair(a: &Segment, b: &Segment) -> Option<JunctionCandidate> {
    let (at, s, t) = line_intersection(a.p, a.q, b.p, b.q)?;
    let (sa, sb) = (1.0 / a.length(), 1.0 / b.length());
    let on_a = s >= -sa && s <= 1.0 + sa;
    let on_b = t >= -sb && t <= 1.0 + sb;
    if !(on_a && on_b) {
        return None;
    }
    let ids = if a.id <= b.id {
        (a.id, b.id)
    } else {
        (b.id, a.id)
    };
    Some(JunctionCandidate { at, segments: ids })
}

/// Ink runs along each edge of the `side`×`side` window centred on `at`.
pub fn window_crossings(image: &BinaryImage, at: Point, side: usize) -> [usize; 4] {
    let (cx, cy) = (at.x.round() as i64, at.y.round() as i64);
    let r = (side / 2) as i64;
    let runs = |pts: &mut dyn Iterator<Item = (i64, i64)>| {
        let mut n = 0;
        let mut prev = false;
        for (x, y) in pts {
            let v = image.at(x, y);
            if v && !prev {
                n += 1;
            }
            prev = v;
        }
        n
    };
    [
        runs(&mut (cx - r..=cx + r).map(|x| (x, cy - r))),
        runs(&mut (cy - r..=cy + r).map(|y| (cx + r, y))),
        runs(&mut (cx - r..=cx + r).map(|x| (x, cy + r))),
        runs(&mut (cy - r..=cy + r).map(|y| (cx - r, y))),
    ]
}

pub fn validate_intersection(
    image: &BinaryImage,
    candidate: &JunctionCandidate,
    side: usize,
) -> Junction {
    let crossings = window_crossings(image, candidate.at, side);
    let arm_count = crossings.iter().filter(|&&c| c > 0).count();
    Junction {
        at: candidate.at,
        segments: candidate.segments,
        arm_count,
        crossings,
        valid: arm_count >= 3,
    }
}

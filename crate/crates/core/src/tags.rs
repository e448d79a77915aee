//! Inlet/outlet tag detection.
//!
//! Tags are pentagon connectors: a rectangle with one pointed end. Candidates
//! are closed contours that simplify to five convex vertices with a wide
//! bounding box; a probe just outside each short side finds the edge where the
//! pipeline attaches, which decides inlet versus outlet.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{point_line_dist, point_segment_dist, BBox, Point};
use crate::raster::{label, label_background, BinaryImage};

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<Point>,
    /// Closing edge from last to first point is implicit.
    pub closed: bool,
}

impl Polyline {
    pub fn open(points: Vec<Point>) -> Self {
        Self {
            points,
            closed: false,
        }
    }

    pub fn closed(points: Vec<Point>) -> Self {
        Self {
            points,
            closed: true,
        }
    }

    pub fn length(&self) -> f64 {
        let n = self.points.len();
        let mut len: f64 = self.points.windows(2).map(|w| w[0].dist(w[1])).sum();
        if self.closed && n > 1 {
            len += self.points[n - 1].dist(self.points[0]);
        }
        len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourKind {
    /// Outer boundary of an ink component.
    Outer,
    /// Boundary of a background region fully enclosed by ink.
    Hole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub kind: ContourKind,
    pub polyline: Polyline,
    pub bbox: BBox,
}

// Clockwise in image coordinates, starting west.
const MOORE: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

/// Moore-neighbour trace of the region whose pixels satisfy `inside`, starting
/// at its first pixel in raster order.
fn trace(start: (i64, i64), inside: impl Fn(i64, i64) -> bool) -> Vec<(i64, i64)> {
    let mut out = vec![start];
    // the west neighbour of a raster-first pixel is outside
    let mut cur = start;
    let mut back = 0usize;
    let mut first_step: Option<(i64, i64)> = None;
    let limit = 1 << 24;
    for _ in 0..limit {
        let mut found = None;
        for k in 1..=8 {
            let d = (back + k) % 8;
            let (nx, ny) = (cur.0 + MOORE[d].0, cur.1 + MOORE[d].1);
            if inside(nx, ny) {
                found = Some((d, (nx, ny)));
                break;
            }
        }
        let Some((d, next)) = found else {
            return out; // isolated pixel
        };
        if cur == start {
            match first_step {
                None => first_step = Some(next),
                Some(f) if f == next => break,
                Some(_) => {}
            }
        }
        out.push(next);
        // new backtrack: the neighbour examined just before `next`, seen from `next`
        let prev_dir = (d + 7) % 8;
        let bx = cur.0 + MOORE[prev_dir].0;
        let by = cur.1 + MOORE[prev_dir].1;
        back = MOORE
            .iter()
            .position(|&(dx, dy)| (next.0 + dx, next.1 + dy) == (bx, by))
            .unwrap_or((d + 4) % 8);
        cur = next;
    }
    if out.len() > 1 && out.last() == Some(&start) {
        out.pop();
    }
    out
}

/// Outer boundaries of every ink component, followed by the boundaries of
/// enclosed background holes.
///
/// Holes matter for tags whose outline touches a pipeline: the attached line
/// distorts the outer boundary but the enclosed interior keeps its pentagon shape.
pub fn extract_contours(image: &BinaryImage) -> Vec<Contour> {
    let (w, h) = (image.width(), image.height());
    let mut out = Vec::new();

    let (labels, comps) = label(image);
    for c in &comps {
        let id = c.id as u32;
        let start = first_pixel(&labels, w, &c.bbox, id);
        let pts = trace(start, |x, y| {
            x >= 0
                && y >= 0
                && (x as usize) < w
                && (y as usize) < h
                && labels[y as usize * w + x as usize] == id
        });
        out.push(to_contour(ContourKind::Outer, pts, c.bbox));
    }

    let (bg, holes) = label_background(image);
    for c in &holes {
        let b = c.bbox;
        if b.x0 == 0 || b.y0 == 0 || b.x1 == w as i32 - 1 || b.y1 == h as i32 - 1 {
            continue;
        }
        let id = c.id as u32;
        let start = first_pixel(&bg, w, &b, id);
        let pts = trace(start, |x, y| {
            x >= 0
                && y >= 0
                && (x as usize) < w
                && (y as usize) < h
                && bg[y as usize * w + x as usize] == id
        });
        out.push(to_contour(ContourKind::Hole, pts, b));
    }
    out
}

fn first_pixel(labels: &[u32], w: usize, b: &BBox, id: u32) -> (i64, i64) {
    let y = b.y0 as usize;
    let x = (b.x0 as usize..=b.x1 as usize)
        .find(|&x| labels[y * w + x] == id)
        .expect("bbox top row holds a member pixel");
    (x as i64, y as i64)
}

fn to_contour(kind: ContourKind, pts: Vec<(i64, i64)>, bbox: BBox) -> Contour {
    Contour {
        kind,
        polyline: Polyline::closed(
            pts.into_iter()
                .map(|(x, y)| Point::new(x as f64, y as f64))
                .collect(),
        ),
        bbox,
    }
}

/// Ramer-Douglas-Peucker simplification.
///
/// Open lines keep both endpoints. Closed lines are split at the first point
/// and the point farthest from it, simplified per half, then any vertex whose
/// removal keeps all original points of the merged edge within `epsilon` is
/// dropped.
pub fn simplify_rdp(line: &Polyline, epsilon: f64) -> Polyline {
    let pts = &line.points;
    let n = pts.len();
    if n <= 2 {
        return line.clone();
    }
    if !line.closed {
        let keep = rdp_indices(pts, 0, n - 1, epsilon);
        return Polyline::open(keep.into_iter().map(|i| pts[i]).collect());
    }

    let far = (1..n)
        .max_by(|&a, &b| pts[0].dist(pts[a]).total_cmp(&pts[0].dist(pts[b])))
        .unwrap_or(0);
    if far == 0 || pts[0].dist(pts[far]) == 0.0 {
        return Polyline::closed(vec![pts[0]]);
    }
    let mut idx = rdp_indices(pts, 0, far, epsilon);
    let mut ring: Vec<Point> = pts[far..].to_vec();
    ring.push(pts[0]);
    let second = rdp_indices(&ring, 0, ring.len() - 1, epsilon);
    idx.extend(second[1..second.len() - 1].iter().map(|&i| i + far));

    // cyclic cleanup
    loop {
        let m = idx.len();
        if m <= 3 {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for k in 0..m {
            let (a, b) = (idx[(k + m - 1) % m], idx[(k + 1) % m]);
            let dev = span_deviation(pts, a, b);
            if dev <= epsilon && best.is_none_or(|(_, d)| dev < d) {
                best = Some((k, dev));
            }
        }
        match best {
            Some((k, _)) => {
                idx.remove(k);
            }
            None => break,
        }
    }
    Polyline::closed(idx.into_iter().map(|i| pts[i]).collect())
}

/// Largest distance from the original points strictly between `a` and `b`
/// (walking forward cyclically) to the segment `a`–`b`.
fn span_deviation(pts: &[Point], a: usize, b: usize) -> f64 {
    let n = pts.len();
    let mut i = (a + 1) % n;
    let mut worst = 0.0f64;
    while i != b {
        worst = worst.max(point_segment_dist(pts[i], pts[a], pts[b]));
        i = (i + 1) % n;
    }
    worst
}

fn rdp_indices(pts: &[Point], first: usize, last: usize, eps: f64) -> Vec<usize> {
    let mut keep = vec![false; pts.len()];
    keep[first] = true;
    keep[last] = true;
    let mut stack = vec![(first, last)];
    while let Some((a, b)) = stack.pop() {
        if b <= a + 1 {
            continue;
        }
        let (mut worst, mut at) = (0.0, a);
        for i in a + 1..b {
            let d = if pts[a] == pts[b] {
                pts[i].dist(pts[a])
            } else {
                point_line_dist(pts[i], pts[a], pts[b])
            };
            if d > worst {
                worst = d;
                at = i;
            }
        }
        if worst > eps {
            keep[at] = true;
            stack.push((a, at));
            stack.push((at, b));
        }
    }
    (0..pts.len()).filter(|&i| keep[i]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Direction::Left => -1.0,
            Direction::Right => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagKind {
    Inlet,
    Outlet,
}

/// Which kind an attachment on the pointed (apex) or square (flat) end means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindMapping {
    pub apex: TagKind,
    pub flat: TagKind,
}

impl Default for KindMapping {
    fn default() -> Self {
        Self {
            apex: TagKind::Outlet,
            flat: TagKind::Inlet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TagParams {
    /// RDP tolerance as a fraction of contour perimeter.
    pub epsilon_frac: f64,
    /// Side of the square attachment probe.
    pub probe: usize,
    pub mapping: KindMapping,
}

impl Default for TagParams {
    fn default() -> Self {
        Self {
            epsilon_frac: 0.02,
            probe: 21,
            mapping: KindMapping::default(),
        }
    }
}

/// Shape-qualified tag before orientation and classification.
#[derive(Debug, Clone, PartialEq)]
pub struct TagCandidate {
    pub vertices: [Point; 5],
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tag {
    pub vertices: [Point; 5],
    pub bbox: BBox,
    pub direction: Direction,
    pub kind: TagKind,
    /// Midpoint of the bbox edge where the pipeline attaches.
    pub emerge: Point,
}

impl Tag {
    pub fn new(
        vertices: [Point; 5],
        bbox: BBox,
        direction: Direction,
        kind: TagKind,
        emerge: Point,
    ) -> Self {
        assert!(
            wide_enough(&bbox),
            "tag bbox {bbox:?} narrower than 3x its height"
        );
        assert!(
            on_bbox_boundary(&bbox, emerge),
            "emerge point {emerge:?} off bbox {bbox:?}"
        );
        Self {
            vertices,
            bbox,
            direction,
            kind,
            emerge,
        }
    }

    /// Outward unit vector of the attachment side.
    pub fn attach_normal(&self) -> Point {
        if self.emerge.x >= self.bbox.center().x {
            Point::new(1.0, 0.0)
        } else {
            Point::new(-1.0, 0.0)
        }
    }
}

fn wide_enough(b: &BBox) -> bool {
    b.width() >= 3 * b.height()
}

fn on_bbox_boundary(b: &BBox, p: Point) -> bool {
    let eps = 1e-9;
    let inside = p.x >= b.x0 as f64 - eps
        && p.x <= b.x1 as f64 + eps
        && p.y >= b.y0 as f64 - eps
        && p.y <= b.y1 as f64 + eps;
    let edge = (p.x - b.x0 as f64).abs() < eps
        || (p.x - b.x1 as f64).abs() < eps
        || (p.y - b.y0 as f64).abs() < eps
        || (p.y - b.y1 as f64).abs() < eps;
    inside && edge
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() / 2.0
}

fn is_convex(v: &[Point]) -> bool {
    let n = v.len();
    let mut sign = 0.0;
    for i in 0..n {
        let a = v[(i + 1) % n].sub(v[i]);
        let b = v[(i + 2) % n].sub(v[(i + 1) % n]);
        let c = a.cross(b);
        if c.abs() < 1e-9 {
            continue;
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if c.signum() != sign {
            return false;
        }
    }
    true
}

/// Offsets a convex polygon outward by `d`.
fn offset_convex(v: &[Point], d: f64) -> Option<Vec<Point>> {
    let n = v.len();
    let orient = signed_area(v).signum();
    if orient == 0.0 {
        return None;
    }
    let lines: Vec<(Point, Point)> = (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let e = b.sub(a);
            let len = e.norm();
            // outward normal: for positive area (clockwise on screen) it is (e.y, -e.x)
            let nrm = Point::new(e.y, -e.x).scale(orient / len);
            (a.add(nrm.scale(d)), b.add(nrm.scale(d)))
        })
        .collect();
    (0..n)
        .map(|i| {
            let (a, b) = lines[(i + n - 1) % n];
            let (c, e) = lines[i];
            crate::geom::line_intersection(a, b, c, e).map(|(p, _, _)| p)
        })
        .collect()
}

/// Ink run length going up from just above `(x, y)`.
fn stroke_above(image: &BinaryImage, x: i64, y: i64) -> i64 {
    let mut t = 0;
    while image.at(x, y - 1 - t) {
        t += 1;
    }
    t
}

/// Contours that simplify to a convex pentagon whose bbox is at least three
/// times wider than tall.
pub fn detect_tags(image: &BinaryImage, params: &TagParams) -> Vec<TagCandidate> {
    let contours = extract_contours(image);
    let mut out: Vec<TagCandidate> = Vec::new();
    // outer contours first so a standalone outline is reported once
    for c in contours.iter().filter(|c| c.kind == ContourKind::Outer) {
        if let Some(cand) = pentagon_candidate(image, c, params) {
            out.push(cand);
        }
    }
    for c in contours.iter().filter(|c| c.kind == ContourKind::Hole) {
        if let Some(cand) = pentagon_candidate(image, c, params) {
            if out.iter().all(|o| o.bbox.iou(&cand.bbox) <= 0.5) {
                out.push(cand);
            }
        }
    }
    out.sort_by_key(|c| (c.bbox.y0, c.bbox.x0));
    out
}

fn pentagon_candidate(
    image: &BinaryImage,
    c: &Contour,
    params: &TagParams,
) -> Option<TagCandidate> {
    if c.polyline.points.len() < 5 {
        return None;
    }
    let eps = (params.epsilon_frac * c.polyline.length()).max(1.0);
    let simple = simplify_rdp(&c.polyline, eps);
    if simple.points.len() != 5 || !is_convex(&simple.points) {
        return None;
    }
    let (vertices, bbox) = match c.kind {
        ContourKind::Outer => (simple.points.clone(), c.bbox),
        ContourKind::Hole => {
            let cx = ((c.bbox.x0 + c.bbox.x1) / 2) as i64;
            let t = stroke_above(image, cx, c.bbox.y0 as i64);
            if t == 0 {
                return None;
            }
            let outer = offset_convex(&simple.points, t as f64)?;
            let bbox = BBox::around(&outer)?;
            (outer, bbox)
        }
    };
    if !wide_enough(&bbox) {
        return None;
    }
    Some(TagCandidate {
        vertices: vertices.try_into().ok()?,
        bbox,
    })
}

/// Pointing direction: the side of the vertical bbox midline holding three
/// vertices. Vertices within 1 px of the midline join the side with fewer
/// points; an even split or any result other than 3/2 is an error.
pub fn orient_tag(vertices: &[Point; 5]) -> Result<Direction> {
    let (lo, hi) = vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.x), hi.max(p.x))
        });
    let mid = (lo + hi) / 2.0;
    let mut left = vertices.iter().filter(|p| p.x < mid - 1.0).count();
    let mut right = vertices.iter().filter(|p| p.x > mid + 1.0).count();
    let tied = 5 - left - right;
    for _ in 0..tied {
        match left.cmp(&right) {
            std::cmp::Ordering::Less => left += 1,
            std::cmp::Ordering::Greater => right += 1,
            std::cmp::Ordering::Equal => return Err(Error::Orientation { left, right, tied }),
        }
    }
    match (left, right) {
        (2, 3) => Ok(Direction::Right),
        (3, 2) => Ok(Direction::Left),
        _ => Err(Error::Orientation { left, right, tied }),
    }
}

/// Maximal ink runs along a vertical column between `y0` and `y1` (clipped).
fn column_runs(image: &BinaryImage, x: i64, y0: i64, y1: i64) -> usize {
    let mut runs = 0;
    let mut prev = false;
    for y in y0..=y1 {
        let v = image.at(x, y);
        if v && !prev {
            runs += 1;
        }
        prev = v;
    }
    runs
}

/// Finds the attachment side with two square probes just outside the short
/// bbox edges and assigns kind and emerge point.
pub fn classify_tag(
    image: &BinaryImage,
    candidate: &TagCandidate,
    direction: Direction,
    params: &TagParams,
) -> Result<Tag> {
    let k = params.probe.max(1) as i64;
    let b = candidate.bbox;
    let cy = ((b.y0 + b.y1) as f64 / 2.0).round() as i64;
    let (y0, y1) = (cy - k / 2, cy + k / 2);
    let left = column_runs(image, b.x0 as i64 - k, y0, y1);
    let right = column_runs(image, b.x1 as i64 + k, y0, y1);
    let side = match (left == 1, right == 1) {
        (true, false) => Direction::Left,
        (false, true) => Direction::Right,
        _ => return Err(Error::UnclassifiedTag { left, right }),
    };
    let kind = if side == direction {
        params.mapping.apex
    } else {
        params.mapping.flat
    };
    let mid_y = (b.y0 + b.y1) as f64 / 2.0;
    let emerge = match side {
        Direction::Left => Point::new(b.x0 as f64, mid_y),
        Direction::Right => Point::new(b.x1 as f64, mid_y),
    };
    Ok(Tag::new(candidate.vertices, b, direction, kind, emerge))
}

/// Outcome of running orientation and classification over all candidates.
#[derive(Debug, Default)]
pub struct TagScan {
    pub tags: Vec<Tag>,
    pub rejected: Vec<(TagCandidate, Error)>,
}

pub fn find_tags(image: &BinaryImage, params: &TagParams) -> TagScan {
    let mut scan = TagScan::default();
    for cand in detect_tags(image, params) {
        let res =
            orient_tag(&cand.vertices).and_then(|dir| classify_tag(image, &cand, dir, params));
        match res {
            Ok(tag) => scan.tags.push(tag),
            Err(e) => scan.rejected.push((cand, e)),
        }
    }
    scan
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fills (or outlines, with `stroke`) the polygon by pixel-center containment.
    fn render_polygon(img: &mut BinaryImage, poly: &[Point], stroke: Option<f64>) {
        let n = poly.len();
        for y in 0..img.height() {
            for x in 0..img.width() {
                let p = Point::new(x as f64, y as f64);
                let mut inside = false;
                for i in 0..n {
                    let (a, b) = (poly[i], poly[(i + 1) % n]);
                    if (a.y > p.y) != (b.y > p.y)
                        && p.x < a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x)
                    {
                        inside = !inside;
                    }
                }
                let edge = (0..n)
                    .map(|i| point_segment_dist(p, poly[i], poly[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min);
                let on = match stroke {
                    None => inside || edge < 0.5,
                    Some(t) => (inside && edge < t) || edge < 0.5,
                };
                if on {
                    img.set(x, y, true);
                }
            }
        }
    }

    fn right_tag(x: f64, y: f64, w: f64, h: f64) -> Vec<Point> {
        vec![
            Point::new(x, y),
            Point::new(x + w - 1.0 - h, y),
            Point::new(x + w - 1.0, y + (h - 1.0) / 2.0),
            Point::new(x + w - 1.0 - h, y + h - 1.0),
            Point::new(x, y + h - 1.0),
        ]
    }

    #[test]
    fn contour_of_filled_square() {
        let mut img = BinaryImage::new(40, 40).unwrap();
        for y in 10..30 {
            for x in 10..30 {
                img.set(x, y, true);
            }
        }
        let cs = extract_contours(&img);
        assert_eq!(cs.len(), 1);
        let per = cs[0].polyline.length();
        assert!((per - 4.0 * 19.0).abs() < 1e-9, "{per}");
        assert!(extract_contours(&BinaryImage::new(5, 5).unwrap()).is_empty());
    }

    #[test]
    fn two_blobs_two_contours() {
        let apart = BinaryImage::from_rows(&["##.....", "##.....", ".....##", ".....##"]).unwrap();
        assert_eq!(extract_contours(&apart).len(), 2);
    }

    #[test]
    fn ring_has_outer_and_hole_contours() {
        let ring = BinaryImage::from_rows(&[".......", ".#####.", ".#...#.", ".#####.", "......."])
            .unwrap();
        let cs = extract_contours(&ring);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[1].kind, ContourKind::Hole);
        assert_eq!(cs[1].bbox, BBox::new(2, 2, 4, 2));
    }

    #[test]
    fn rdp_square_and_line() {
        let mut pts = Vec::new();
        for i in 0..10 {
            pts.push(Point::new(i as f64, 0.0));
        }
        for i in 0..10 {
            pts.push(Point::new(10.0, i as f64));
        }
        for i in 0..10 {
            pts.push(Point::new(10.0 - i as f64, 10.0));
        }
        for i in 0..10 {
            pts.push(Point::new(0.0, 10.0 - i as f64));
        }
        let s = simplify_rdp(&Polyline::closed(pts), 2.0);
        assert_eq!(s.points.len(), 4);

        let line = Polyline::open(
            (0..50)
                .map(|i| Point::new(i as f64, 2.0 * i as f64))
                .collect(),
        );
        let s = simplify_rdp(&line, 0.5);
        assert_eq!(s.points, vec![Point::new(0.0, 0.0), Point::new(49.0, 98.0)]);
    }

    #[test]
    fn rasterized_pentagon_has_five_vertices() {
        let mut img = BinaryImage::new(120, 50).unwrap();
        render_polygon(&mut img, &right_tag(10.0, 10.0, 90.0, 30.0), Some(2.0));
        let cands = detect_tags(&img, &TagParams::default());
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].bbox, BBox::new(10, 10, 99, 39));
        assert_eq!(orient_tag(&cands[0].vertices).unwrap(), Direction::Right);
    }

    #[test]
    fn square_and_narrow_pentagon_rejected() {
        let mut img = BinaryImage::new(120, 60).unwrap();
        for y in 5..45 {
            for x in 5..45 {
                img.set(x, y, true);
            }
        }
        render_polygon(&mut img, &right_tag(55.0, 10.0, 60.0, 30.0), None);
        assert!(detect_tags(&img, &TagParams::default()).is_empty());
    }

    #[test]
    fn orientation_counting() {
        let v = [
            Point::new(0.0, 0.0),
            Point::new(60.0, 0.0),
            Point::new(90.0, 15.0),
            Point::new(60.0, 30.0),
            Point::new(0.0, 30.0),
        ];
        assert_eq!(orient_tag(&v).unwrap(), Direction::Right);
        let mirrored = v.map(|p| Point::new(90.0 - p.x, p.y));
        assert_eq!(orient_tag(&mirrored).unwrap(), Direction::Left);
    }

    #[test]
    fn regular_pentagon_is_ambiguous() {
        let v: Vec<Point> = (0..5)
            .map(|k| {
                let a = -std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 5.0;
                Point::new(50.0 + 20.0 * a.cos(), 50.0 + 20.0 * a.sin())
            })
            .collect();
        let v: [Point; 5] = v.try_into().unwrap();
        assert!(matches!(orient_tag(&v), Err(Error::Orientation { .. })));
    }

    fn tag_with_line(line_on_right: bool) -> (BinaryImage, TagCandidate) {
        let mut img = BinaryImage::new(260, 60).unwrap();
        render_polygon(&mut img, &right_tag(80.0, 15.0, 96.0, 30.0), Some(2.0));
        let xs: Vec<usize> = if line_on_right {
            (176..250).collect()
        } else {
            (5..80).collect()
        };
        for x in xs {
            img.set(x, 29, true);
            img.set(x, 30, true);
        }
        let cands = detect_tags(&img, &TagParams::default());
        assert_eq!(cands.len(), 1, "attached line must not hide the tag");
        (img, cands[0].clone())
    }

    #[test]
    fn apex_attachment_is_outlet() {
        let (img, cand) = tag_with_line(true);
        let dir = orient_tag(&cand.vertices).unwrap();
        assert_eq!(dir, Direction::Right);
        let tag = classify_tag(&img, &cand, dir, &TagParams::default()).unwrap();
        assert_eq!(tag.kind, TagKind::Outlet);
        assert_eq!(tag.emerge.x, tag.bbox.x1 as f64);
        assert!((tag.emerge.y - tag.bbox.center().y).abs() < 1e-9);
        assert!(
            tag.bbox.iou(&BBox::new(80, 15, 175, 44)) > 0.9,
            "{:?}",
            tag.bbox
        );
    }

    #[test]
    fn flat_attachment_is_inlet() {
        let (img, cand) = tag_with_line(false);
        let dir = orient_tag(&cand.vertices).unwrap();
        let tag = classify_tag(&img, &cand, dir, &TagParams::default()).unwrap();
        assert_eq!(tag.kind, TagKind::Inlet);
        assert_eq!(tag.emerge.x, tag.bbox.x0 as f64);
    }

    #[test]
    fn isolated_tag_is_unclassified() {
        let mut img = BinaryImage::new(200, 60).unwrap();
        render_polygon(&mut img, &right_tag(50.0, 15.0, 96.0, 30.0), Some(2.0));
        let cand = detect_tags(&img, &TagParams::default()).remove(0);
        let err = classify_tag(&img, &cand, Direction::Right, &TagParams::default()).unwrap_err();
        assert!(matches!(err, Error::UnclassifiedTag { left: 0, right: 0 }));
    }

    #[test]
    fn both_sides_attached_is_ambiguous() {
        let (mut img, cand) = tag_with_line(true);
        for x in 5..80 {
            img.set(x, 29, true);
        }
        let err = classify_tag(&img, &cand, Direction::Right, &TagParams::default()).unwrap_err();
        assert!(matches!(err, Error::UnclassifiedTag { left: 1, right: 1 }));
    }
}

//! Scoring a predicted result against ground truth.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::flow::{ComponentRef, FlowForest, NodeKind};
use crate::geom::{point_segment_dist, BBox};
use crate::lines::Segment;
use crate::result::PidGraph;
use crate::symbols::SymbolClass;
use crate::tags::TagKind;

/// Percentage with one decimal, rounded half up, using exact integer
/// arithmetic. `None` for an empty denominator.
pub fn percent_tenths(successful: u64, total: u64) -> Option<u64> {
    (total > 0).then(|| (2 * successful * 1000 + total) / (2 * total))
}

pub fn format_percent(successful: u64, total: u64) -> String {
    match percent_tenths(successful, total) {
        Some(t) => format!("{}.{}", t / 10, t % 10),
        None => "n/a".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub name: String,
    pub successful: usize,
    pub total: usize,
    /// Raw ratio `successful / total`.
    pub accuracy: Option<f64>,
    /// Number of predictions, for rows where precision is meaningful.
    pub predicted: Option<usize>,
}

impl MetricRow {
    pub fn new(name: &str, successful: usize, total: usize, predicted: Option<usize>) -> Self {
        Self {
            name: name.into(),
            successful,
            total,
            accuracy: (total > 0).then(|| successful as f64 / total as f64),
            predicted,
        }
    }

    pub fn precision(&self) -> Option<f64> {
        self.predicted
            .filter(|&p| p > 0)
            .map(|p| self.successful as f64 / p as f64)
    }

    pub fn percent(&self) -> String {
        format_percent(self.successful as u64, self.total as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// Rows are actual classes, columns predicted, both in inventory order.
    pub counts: Vec<Vec<u64>>,
}

impl Default for ConfusionMatrix {
    fn default() -> Self {
        let n = SymbolClass::ALL.len();
        Self {
            counts: vec![vec![0; n]; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub class: SymbolClass,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 11]; 11]) -> Self {
        Self {
            counts: counts.iter().map(|r| r.to_vec()).collect(),
        }
    }

    pub fn add(&mut self, actual: SymbolClass, predicted: SymbolClass) {
        self.counts[actual.index()][predicted.index()] += 1;
    }

    pub fn row_sum(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn col_sum(&self, c: usize) -> u64 {
        self.counts.iter().map(|r| r[c]).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.counts
            .iter()
            .enumerate()
            .all(|(i, r)| r.iter().enumerate().all(|(j, &v)| i == j || v == 0))
    }

    /// Standard definitions: precision over the predicted column, recall
    /// over the actual row.
    pub fn scores(&self) -> Vec<ClassScores> {
        SymbolClass::ALL
            .iter()
            .enumerate()
            .map(|(c, &class)| {
                let d = self.counts[c][c];
                let precision = ratio(d, self.col_sum(c));
                let recall = ratio(d, self.row_sum(c));
                let f1 = if precision + recall == 0.0 {
                    0.0
                } else {
                    2.0 * precision * recall / (precision + recall)
                };
                ClassScores {
                    class,
                    precision,
                    recall,
                    f1,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalParams {
    pub iou: f64,
    /// Endpoint tolerance for segment matching and line correspondence.
    pub endpoint_tol: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            iou: 0.5,
            endpoint_tol: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rows: Vec<MetricRow>,
    pub confusion: ConfusionMatrix,
    pub per_class: Vec<ClassScores>,
    pub symbols_missed: usize,
    pub symbols_spurious: usize,
    pub forest_equal: bool,
}

impl Metrics {
    pub fn row(&self, name: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            s += &format!(
                "{:<26} {:>5} / {:<5} {:>6}%\n",
                r.name,
                r.successful,
                r.total,
                r.percent()
            );
        }
        s += &format!("{:<26} {}\n", "Forest equal", self.forest_equal);
        s += &format!(
            "{:<8} {:>9} {:>9} {:>9}\n",
            "class", "precision", "recall", "f1"
        );
        for c in &self.per_class {
            s += &format!(
                "{:<8} {:>9.3} {:>9.3} {:>9.3}\n",
                c.class.label(),
                c.precision,
                c.recall,
                c.f1
            );
        }
        s
    }
}

/// Greedy one-to-one matching by descending score; ties go to lower indices.
fn greedy(mut pairs: Vec<(f64, usize, usize)>) -> Vec<(usize, usize)> {
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let (mut used_p, mut used_g) = (BTreeSet::new(), BTreeSet::new());
    let mut out = Vec::new();
    for (_, p, g) in pairs {
        if !used_p.contains(&p) && !used_g.contains(&g) {
            used_p.insert(p);
            used_g.insert(g);
            out.push((p, g));
        }
    }
    out
}

fn match_boxes(
    pred: &[BBox],
    gt: &[BBox],
    iou: f64,
    compatible: impl Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, p) in pred.iter().enumerate() {
        for (j, g) in gt.iter().enumerate() {
            let v = p.iou(g);
            if v >= iou && compatible(i, j) {
                pairs.push((v, i, j));
            }
        }
    }
    greedy(pairs)
}

fn endpoint_error(a: &Segment, b: &Segment) -> f64 {
    let direct = a.p.dist(b.p).max(a.q.dist(b.q));
    let flipped = a.p.dist(b.q).max(a.q.dist(b.p));
    direct.min(flipped)
}

/// Predicted segments paired with ground-truth segments whose endpoints both
/// lie within `tol`.
pub fn match_segments(pred: &[Segment], gt: &[Segment], tol: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, p) in pred.iter().enumerate() {
        for (j, g) in gt.iter().enumerate() {
            let e = endpoint_error(p, g);
            if e <= tol {
                pairs.push((-e, i, j));
            }
        }
    }
    greedy(pairs)
}

/// Ground-truth line a predicted line lies along, if any.
fn corresponding_line(p: &Segment, gt: &[Segment], tol: f64) -> Option<usize> {
    gt.iter()
        .map(|g| {
            let d = point_segment_dist(p.p, g.p, g.q).max(point_segment_dist(p.q, g.p, g.q));
            (d, g.id)
        })
        .filter(|&(d, _)| d <= tol)
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, id)| id)
}

type CanonicalPath = (usize, usize, Vec<usize>);

fn canonical_paths(
    forest: &FlowForest,
    tag: impl Fn(usize) -> Option<usize>,
    line: impl Fn(usize) -> Option<usize>,
) -> Option<BTreeSet<CanonicalPath>> {
    let mut out = BTreeSet::new();
    for tree in &forest.trees {
        for path in tree.paths() {
            let outlet = tag(path[0].id)?;
            let inlet = tag(path.last().expect("non-empty").id)?;
            let mut lines: Vec<usize> = Vec::new();
            for n in &path {
                if n.kind == NodeKind::Line {
                    let l = line(n.id)?;
                    if lines.last() != Some(&l) {
                        lines.push(l);
                    }
                }
            }
            out.insert((outlet, inlet, lines));
        }
    }
    Some(out)
}

pub fn evaluate(pred: &PidGraph, gt: &PidGraph, params: &EvalParams) -> Metrics {
    let mut rows = Vec::new();

    let pc: Vec<BBox> = pred.codes.iter().map(|c| c.item.bbox).collect();
    let gc: Vec<BBox> = gt.codes.iter().map(|c| c.item.bbox).collect();
    let code_pairs = match_boxes(&pc, &gc, params.iou, |_, _| true);
    rows.push(MetricRow {
        name: "Pipeline-Code Detection".into(),
        successful: code_pairs.len(),
        total: gc.len(),
        accuracy: None,
        predicted: Some(pc.len()),
    });

    let seg_pairs = match_segments(&pred.segments, &gt.segments, params.endpoint_tol);
    rows.push(MetricRow {
        name: "Pipeline Detection".into(),
        successful: seg_pairs.len(),
        total: gt.segments.len(),
        accuracy: None,
        predicted: Some(pred.segments.len()),
    });

    let pt: Vec<BBox> = pred.tags.iter().map(|t| t.item.bbox).collect();
    let gtb: Vec<BBox> = gt.tags.iter().map(|t| t.item.bbox).collect();
    let tag_pairs = match_boxes(&pt, &gtb, params.iou, |i, j| {
        pred.tags[i].item.kind == gt.tags[j].item.kind
    });
    for (kind, name) in [
        (TagKind::Outlet, "Outlet Detection"),
        (TagKind::Inlet, "Inlet Detection"),
    ] {
        rows.push(MetricRow {
            name: name.into(),
            successful: tag_pairs
                .iter()
                .filter(|&&(_, g)| gt.tags[g].item.kind == kind)
                .count(),
            total: gt.tags.iter().filter(|t| t.item.kind == kind).count(),
            accuracy: None,
            predicted: Some(pred.tags.iter().filter(|t| t.item.kind == kind).count()),
        });
    }

    let line_map = |id: usize| {
        pred.segment(id)
            .and_then(|s| corresponding_line(s, &gt.segments, params.endpoint_tol))
    };
    let associated = |p: ComponentRef, g: ComponentRef| match (pred.line_of(p), gt.line_of(g)) {
        (Some(pl), Some(gl)) => line_map(pl) == Some(gl),
        _ => false,
    };
    rows.push(MetricRow {
        name: "Pipeline Code Association".into(),
        successful: code_pairs
            .iter()
            .filter(|&&(p, g)| associated(ComponentRef::Code(p), ComponentRef::Code(g)))
            .count(),
        total: code_pairs.len(),
        accuracy: None,
        predicted: None,
    });
    for (kind, name) in [
        (TagKind::Outlet, "Outlet Association"),
        (TagKind::Inlet, "Inlet Association"),
    ] {
        let detected: Vec<&(usize, usize)> = tag_pairs
            .iter()
            .filter(|&&(_, g)| gt.tags[g].item.kind == kind)
            .collect();
        rows.push(MetricRow {
            name: name.into(),
            successful: detected
                .iter()
                .filter(|&&&(p, g)| associated(ComponentRef::Tag(p), ComponentRef::Tag(g)))
                .count(),
            total: detected.len(),
            accuracy: None,
            predicted: None,
        });
    }

    let ps: Vec<BBox> = pred.symbols.iter().map(|s| s.item.bbox).collect();
    let gs: Vec<BBox> = gt.symbols.iter().map(|s| s.item.bbox).collect();
    let sym_pairs = match_boxes(&ps, &gs, params.iou, |_, _| true);
    let mut confusion = ConfusionMatrix::default();
    for &(p, g) in &sym_pairs {
        confusion.add(gt.symbols[g].item.class, pred.symbols[p].item.class);
    }
    rows.push(MetricRow {
        name: "Symbol Detection".into(),
        successful: sym_pairs
            .iter()
            .filter(|&&(p, g)| pred.symbols[p].item.class == gt.symbols[g].item.class)
            .count(),
        total: gs.len(),
        accuracy: None,
        predicted: Some(ps.len()),
    });

    let tag_map = |id: usize| tag_pairs.iter().find(|&&(p, _)| p == id).map(|&(_, g)| g);
    let forest_equal = match (
        canonical_paths(&pred.flow_forest(), tag_map, line_map),
        canonical_paths(&gt.flow_forest(), Some, Some),
    ) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    };

    for r in &mut rows {
        r.accuracy = (r.total > 0).then(|| r.successful as f64 / r.total as f64);
    }
    Metrics {
        rows,
        per_class: confusion.scores(),
        confusion,
        symbols_missed: gs.len() - sym_pairs.len(),
        symbols_spurious: ps.len() - sym_pairs.len(),
        forest_equal,
    }
}

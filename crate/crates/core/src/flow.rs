//! Component-to-pipeline association and the outlet-rooted flow forest.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::codes::PipelineCode;
use crate::error::{Error, Result};
use crate::geom::{point_segment_dist, segment_box_dist, Point};
use crate::lines::{Junction, Segment};
use crate::symbols::SymbolDetection;
use crate::tags::{Tag, TagKind};

/// A detected component, by its index in the corresponding result section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", content = "id", rename_all = "lowercase")]
pub enum ComponentRef {
    Tag(usize),
    Code(usize),
    Symbol(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Association {
    pub component: ComponentRef,
    pub line: usize,
    #[serde(serialize_with = "crate::geom::ser_round3")]
    pub distance: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Associations {
    pub matched: Vec<Association>,
    pub unassociated: Vec<ComponentRef>,
}

impl Associations {
    fn push(&mut self, component: ComponentRef, best: Option<(f64, usize)>) {
        match best {
            Some((distance, line)) => self.matched.push(Association {
                component,
                line,
                distance,
            }),
            None => self.unassociated.push(component),
        }
    }
}

/// Argmin over `(distance, id)` so equal distances fall to the smaller id.
fn nearest(candidates: impl Iterator<Item = (f64, usize)>) -> Option<(f64, usize)> {
    candidates.min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
}

/// Part of the segment on the outward side of the tag's attachment edge, if any.
fn clip_to_side(seg: &Segment, origin: Point, normal: Point, slack: f64) -> Option<(Point, Point)> {
    let (a, b) = (
        seg.p.sub(origin).dot(normal) + slack,
        seg.q.sub(origin).dot(normal) + slack,
    );
    match (a >= 0.0, b >= 0.0) {
        (true, true) => Some((seg.p, seg.q)),
        (false, false) => None,
        _ => {
            let t = a / (a - b);
            let cut = seg.p.add(seg.q.sub(seg.p).scale(t));
            Some(if a >= 0.0 { (seg.p, cut) } else { (cut, seg.q) })
        }
    }
}

const SIDE_SLACK: f64 = 2.0;

/// Pairs each tag with the nearest segment on its attachment side, measured
/// from the emerge point.
pub fn associate_tags(tags: &[Tag], segments: &[Segment], max_dist: f64) -> Associations {
    let mut out = Associations::default();
    for (i, tag) in tags.iter().enumerate() {
        let normal = tag.attach_normal();
        let best = nearest(segments.iter().filter_map(|s| {
            let (a, b) = clip_to_side(s, tag.emerge, normal, SIDE_SLACK)?;
            Some((point_segment_dist(tag.emerge, a, b), s.id))
        }))
        .filter(|&(d, _)| d <= max_dist);
        out.push(ComponentRef::Tag(i), best);
    }
    out
}

/// Pairs each code with the segment nearest to any of its bbox corners.
pub fn associate_codes(
    codes: &[PipelineCode],
    segments: &[Segment],
    max_dist: f64,
) -> Associations {
    let mut out = Associations::default();
    for (i, code) in codes.iter().enumerate() {
        let corners = code.bbox.corners();
        let best = nearest(segments.iter().map(|s| {
            let d = corners
                .iter()
                .map(|&c| s.dist_to(c))
                .fold(f64::INFINITY, f64::min);
            (d, s.id)
        }))
        .filter(|&(d, _)| d <= max_dist);
        out.push(ComponentRef::Code(i), best);
    }
    out
}

/// Pairs each symbol with the segment nearest its bbox center, provided that
/// segment passes within `max_gap` of the box.
pub fn associate_symbols(
    symbols: &[SymbolDetection],
    segments: &[Segment],
    max_gap: f64,
) -> Associations {
    let mut out = Associations::default();
    for (i, sym) in symbols.iter().enumerate() {
        let c = sym.bbox.center();
        let best = nearest(segments.iter().map(|s| (s.dist_to(c), s.id))).filter(|&(_, id)| {
            let s = segments.iter().find(|s| s.id == id).expect("id from list");
            segment_box_dist(s.p, s.q, &sym.bbox) <= max_gap
        });
        out.push(ComponentRef::Symbol(i), best);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    OutletRoot,
    Line,
    InletLeaf,
}

/// Tag id for roots and leaves, segment id for lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowNode {
    pub kind: NodeKind,
    pub id: usize,
}

impl FlowNode {
    pub fn root(id: usize) -> Self {
        Self {
            kind: NodeKind::OutletRoot,
            id,
        }
    }

    pub fn line(id: usize) -> Self {
        Self {
            kind: NodeKind::Line,
            id,
        }
    }

    pub fn leaf(id: usize) -> Self {
        Self {
            kind: NodeKind::InletLeaf,
            id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub node: FlowNode,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// One outlet's tree stored as an arena; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowTree {
    pub outlet: usize,
    pub nodes: Vec<TreeNode>,
    /// The line graph offered more than one route to some node.
    pub alternates: bool,
}

impl FlowTree {
    fn new(outlet: usize) -> Self {
        Self {
            outlet,
            nodes: vec![TreeNode {
                node: FlowNode::root(outlet),
                parent: None,
                children: Vec::new(),
            }],
            alternates: false,
        }
    }

    fn add(&mut self, parent: usize, node: FlowNode) -> usize {
        let idx = self.nodes.len();
        self.nodes.push(TreeNode {
            node,
            parent: Some(parent),
            children: Vec::new(),
        });
        self.nodes[parent].children.push(idx);
        idx
    }

    pub fn root(&self) -> FlowNode {
        self.nodes[0].node
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        fn h(t: &FlowTree, i: usize) -> usize {
            t.nodes[i]
                .children
                .iter()
                .map(|&c| 1 + h(t, c))
                .max()
                .unwrap_or(0)
        }
        h(self, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = FlowNode> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.children.is_empty())
            .map(|n| n.node)
    }

    pub fn inlets(&self) -> BTreeSet<usize> {
        self.nodes
            .iter()
            .filter(|n| n.node.kind == NodeKind::InletLeaf)
            .map(|n| n.node.id)
            .collect()
    }

    /// Root-to-inlet paths in depth-first order.
    pub fn paths(&self) -> Vec<Vec<FlowNode>> {
        let mut out = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.node.kind != NodeKind::InletLeaf {
                continue;
            }
            let mut path = vec![n.node];
            let mut cur = i;
            while let Some(p) = self.nodes[cur].parent {
                path.push(self.nodes[p].node);
                cur = p;
            }
            path.reverse();
            out.push(path);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedTree {
    pub outlet: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedNode {
    pub node: FlowNode,
    /// Outlet ids of the trees containing the node.
    pub outlets: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowForest {
    pub trees: Vec<FlowTree>,
    pub dropped: Vec<DroppedTree>,
}

impl FlowForest {
    pub fn tree(&self, outlet: usize) -> Option<&FlowTree> {
        self.trees.iter().find(|t| t.outlet == outlet)
    }

    /// Line and inlet nodes present in more than one tree.
    pub fn shared_nodes(&self) -> Vec<SharedNode> {
        let mut seen: BTreeMap<FlowNode, BTreeSet<usize>> = BTreeMap::new();
        for t in &self.trees {
            for n in &t.nodes[1..] {
                seen.entry(n.node).or_default().insert(t.outlet);
            }
        }
        seen.into_iter()
            .filter(|(_, o)| o.len() > 1)
            .map(|(node, o)| SharedNode {
                node,
                outlets: o.into_iter().collect(),
            })
            .collect()
    }

    /// Every structural invariant of a pruned forest, as a list of violations.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut roots = BTreeSet::new();
        for t in &self.trees {
            let root = &t.nodes[0];
            if root.node.kind != NodeKind::OutletRoot {
                v.push(format!("tree {}: root is {:?}", t.outlet, root.node.kind));
            }
            if !roots.insert(root.node) {
                v.push(format!("tree {}: duplicate root", t.outlet));
            }
            if root.children.len() != 1 {
                v.push(format!(
                    "tree {}: root has {} children",
                    t.outlet,
                    root.children.len()
                ));
            }
            if t.height() < 2 {
                v.push(format!("tree {}: height {}", t.outlet, t.height()));
            }
            for n in &t.nodes[1..] {
                if n.children.is_empty() && n.node.kind != NodeKind::InletLeaf {
                    v.push(format!(
                        "tree {}: leaf {:?} is not an inlet",
                        t.outlet, n.node
                    ));
                }
                if n.node.kind == NodeKind::OutletRoot {
                    v.push(format!("tree {}: nested root", t.outlet));
                }
            }
            let mut lines = BTreeSet::new();
            for n in &t.nodes {
                if n.node.kind == NodeKind::Line && !lines.insert(n.node.id) {
                    v.push(format!("tree {}: line {} repeated", t.outlet, n.node.id));
                }
            }
        }
        v
    }
}

/// Line adjacency through valid junctions, neighbors in ascending id order.
pub fn line_graph(junctions: &[Junction]) -> BTreeMap<usize, BTreeSet<usize>> {
    let mut g: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for j in junctions.iter().filter(|j| j.valid) {
        let (a, b) = j.segments;
        if a != b {
            g.entry(a).or_default().insert(b);
            g.entry(b).or_default().insert(a);
        }
    }
    g
}

/// Grows one breadth-first tree per outlet over the valid-junction line
/// graph. A line joins a tree once, under the first parent that reaches it;
/// inlet leaves hang from the lines they are associated with.
pub fn build_forest(
    tags: &[Tag],
    tag_assocs: &[Association],
    junctions: &[Junction],
    segments: &[Segment],
) -> FlowForest {
    let known: BTreeSet<usize> = segments.iter().map(|s| s.id).collect();
    let graph = line_graph(junctions);
    let mut line_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut inlets_on: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for a in tag_assocs {
        let ComponentRef::Tag(t) = a.component else {
            continue;
        };
        if t >= tags.len() || !known.contains(&a.line) {
            continue;
        }
        line_of.insert(t, a.line);
        if tags[t].kind == TagKind::Inlet {
            inlets_on.entry(a.line).or_default().push(t);
        }
    }
    for v in inlets_on.values_mut() {
        v.sort_unstable();
    }

    let mut forest = FlowForest::default();
    for (outlet, tag) in tags.iter().enumerate() {
        if tag.kind != TagKind::Outlet {
            continue;
        }
        let Some(&start) = line_of.get(&outlet) else {
            forest.dropped.push(DroppedTree {
                outlet,
                reason: "outlet has no associated line".into(),
            });
            continue;
        };
        let mut tree = FlowTree::new(outlet);
        let first = tree.add(0, FlowNode::line(start));
        let mut visited = BTreeSet::from([start]);
        let mut queue = VecDeque::from([first]);
        while let Some(idx) = queue.pop_front() {
            let line = tree.nodes[idx].node.id;
            let parent_line = tree.nodes[idx].parent.map(|p| tree.nodes[p].node);
            for &inlet in inlets_on.get(&line).into_iter().flatten() {
                tree.add(idx, FlowNode::leaf(inlet));
            }
            for &next in graph.get(&line).into_iter().flatten() {
                if visited.insert(next) {
                    let child = tree.add(idx, FlowNode::line(next));
                    queue.push_back(child);
                } else if parent_line != Some(FlowNode::line(next)) {
                    tree.alternates = true;
                }
            }
        }
        forest.trees.push(tree);
    }
    forest
}

/// Keeps only nodes on some root-to-inlet path; trees reaching no inlet are
/// dropped and reported.
pub fn prune_forest(forest: &FlowForest) -> FlowForest {
    let mut out = FlowForest {
        trees: Vec::new(),
        dropped: forest.dropped.clone(),
    };
    for t in &forest.trees {
        let n = t.nodes.len();
        let mut useful = vec![false; n];
        // Children always follow their parent in the arena.
        for i in (0..n).rev() {
            let node = &t.nodes[i];
            useful[i] =
                node.node.kind == NodeKind::InletLeaf || node.children.iter().any(|&c| useful[c]);
        }
        if !useful[0] {
            out.dropped.push(DroppedTree {
                outlet: t.outlet,
                reason: "no inlet reachable from outlet".into(),
            });
            continue;
        }
        let mut kept = FlowTree::new(t.outlet);
        kept.alternates = t.alternates;
        let mut queue = VecDeque::from([(0usize, 0usize)]);
        while let Some((old, new)) = queue.pop_front() {
            for &c in &t.nodes[old].children {
                if useful[c] {
                    let idx = kept.add(new, t.nodes[c].node);
                    queue.push_back((c, idx));
                }
            }
        }
        out.trees.push(kept);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub node: FlowNode,
    pub codes: Vec<usize>,
    pub symbols: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowPath {
    pub outlet: usize,
    pub inlet: usize,
    pub steps: Vec<PathStep>,
}

/// Root-to-inlet paths of one outlet's tree, with the codes and symbols
/// associated to each line on the way.
pub fn query_paths(
    forest: &FlowForest,
    outlet: usize,
    decorations: &[Association],
) -> Result<Vec<FlowPath>> {
    let tree = forest.tree(outlet).ok_or(Error::OutletNotFound(outlet))?;
    let mut codes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut symbols: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for a in decorations {
        match a.component {
            ComponentRef::Code(c) => codes.entry(a.line).or_default().push(c),
            ComponentRef::Symbol(s) => symbols.entry(a.line).or_default().push(s),
            ComponentRef::Tag(_) => {}
        }
    }
    let sorted = |m: &BTreeMap<usize, Vec<usize>>, line: usize| {
        let mut v = m.get(&line).cloned().unwrap_or_default();
        v.sort_unstable();
        v
    };
    Ok(tree
        .paths()
        .into_iter()
        .map(|nodes| FlowPath {
            outlet,
            inlet: nodes.last().expect("non-empty path").id,
            steps: nodes
                .into_iter()
                .map(|node| {
                    let line = node.kind == NodeKind::Line;
                    PathStep {
                        node,
                        codes: if line {
                            sorted(&codes, node.id)
                        } else {
                            Vec::new()
                        },
                        symbols: if line {
                            sorted(&symbols, node.id)
                        } else {
                            Vec::new()
                        },
                    }
                })
                .collect(),
        })
        .collect())
}

/// Query over every tree, in forest order.
pub fn query_all(forest: &FlowForest, decorations: &[Association]) -> Vec<FlowPath> {
    forest
        .trees
        .iter()
        .flat_map(|t| query_paths(forest, t.outlet, decorations).expect("tree present"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::BBox;
    use crate::symbols::SymbolClass;
    use crate::tags::Direction;

    fn seg(id: usize, a: (f64, f64), b: (f64, f64)) -> Segment {
        Segment::new(id, Point::new(a.0, a.1), Point::new(b.0, b.1))
    }

    /// A 96×30 tag with its attachment on the right edge at `(x1, cy)`.
    fn tag_right(x1: i32, cy: i32, kind: TagKind) -> Tag {
        let bbox = BBox::new(x1 - 95, cy - 15, x1, cy + 14);
        let v = [
            Point::new(bbox.x0 as f64, bbox.y0 as f64),
            Point::new(x1 as f64 - 15.0, bbox.y0 as f64),
            Point::new(x1 as f64, cy as f64),
            Point::new(x1 as f64 - 15.0, bbox.y1 as f64),
            Point::new(bbox.x0 as f64, bbox.y1 as f64),
        ];
        Tag::new(
            v,
            bbox,
            Direction::Right,
            kind,
            Point::new(x1 as f64, cy as f64),
        )
    }

    fn junction(a: usize, b: usize, valid: bool) -> Junction {
        Junction {
            at: Point::default(),
            segments: (a.min(b), a.max(b)),
            arm_count: if valid { 4 } else { 2 },
            crossings: [1; 4],
            valid,
        }
    }

    fn assoc(tag: usize, line: usize) -> Association {
        Association {
            component: ComponentRef::Tag(tag),
            line,
            distance: 0.0,
        }
    }

    #[test]
    fn tag_picks_nearest_segment_on_its_side() {
        let t = tag_right(100, 50, TagKind::Outlet);
        let segs = [
            seg(0, (150.0, 0.0), (150.0, 100.0)),
            seg(1, (105.0, 50.0), (300.0, 50.0)),
            // Closer but behind the tag.
            seg(2, (0.0, 50.0), (97.0, 50.0)),
        ];
        let a = associate_tags(std::slice::from_ref(&t), &segs, 30.0);
        assert_eq!(a.matched.len(), 1);
        assert_eq!(a.matched[0].line, 1);
        assert_eq!(a.matched[0].distance, 5.0);
        let far = associate_tags(&[t], &segs[..1], 30.0);
        assert_eq!(far.unassociated, vec![ComponentRef::Tag(0)]);
    }

    #[test]
    fn code_association_examples() {
        let code = PipelineCode {
            text: "x".into(),
            bbox: BBox::new(100, 20, 200, 32),
        };
        let segs = [
            seg(0, (50.0, 40.0), (300.0, 40.0)),
            seg(1, (50.0, 112.0), (300.0, 112.0)),
        ];
        let a = associate_codes(std::slice::from_ref(&code), &segs, 30.0);
        assert_eq!(a.matched[0].line, 0);
        assert_eq!(a.matched[0].distance, 8.0);
        let none = associate_codes(std::slice::from_ref(&code), &[], 30.0);
        assert_eq!(none.unassociated.len(), 1);
        let tie = [
            seg(4, (50.0, 40.0), (300.0, 40.0)),
            seg(3, (50.0, 12.0), (300.0, 12.0)),
        ];
        assert_eq!(associate_codes(&[code], &tie, 30.0).matched[0].line, 3);
    }

    #[test]
    fn symbol_association_examples() {
        let sym = |x0, y0| SymbolDetection {
            class: SymbolClass::BallValve,
            bbox: BBox::new(x0, y0, x0 + 25, y0 + 25),
            score: 1.0,
        };
        let segs = [
            seg(0, (0.0, 50.5), (400.0, 50.5)),
            seg(1, (0.0, 90.5), (400.0, 90.5)),
        ];
        let a = associate_symbols(&[sym(100, 38), sym(100, 300)], &segs, 20.0);
        assert_eq!(a.matched.len(), 1);
        assert_eq!(a.matched[0].line, 0);
        assert_eq!(a.matched[0].distance, 0.0);
        assert_eq!(a.unassociated, vec![ComponentRef::Symbol(1)]);
    }

    /// O on L1; L1 meets L2 and L3; I1 on L2, I2 on L3.
    fn example() -> (Vec<Tag>, Vec<Association>, Vec<Junction>, Vec<Segment>) {
        let tags = vec![
            tag_right(100, 50, TagKind::Outlet),
            tag_right(100, 150, TagKind::Inlet),
            tag_right(100, 250, TagKind::Inlet),
        ];
        let segs = vec![
            seg(1, (0.0, 0.0), (1.0, 0.0)),
            seg(2, (0.0, 0.0), (1.0, 0.0)),
            seg(3, (0.0, 0.0), (1.0, 0.0)),
        ];
        let assocs = vec![assoc(0, 1), assoc(1, 2), assoc(2, 3)];
        let js = vec![junction(1, 2, true), junction(1, 3, true)];
        (tags, assocs, js, segs)
    }

    #[test]
    fn forest_from_worked_example() {
        let (tags, assocs, js, segs) = example();
        let f = prune_forest(&build_forest(&tags, &assocs, &js, &segs));
        assert!(f.violations().is_empty());
        let paths = query_paths(&f, 0, &[]).unwrap();
        let nodes: Vec<Vec<FlowNode>> = paths
            .iter()
            .map(|p| p.steps.iter().map(|s| s.node).collect())
            .collect();
        assert_eq!(
            nodes,
            vec![
                vec![
                    FlowNode::root(0),
                    FlowNode::line(1),
                    FlowNode::line(2),
                    FlowNode::leaf(1)
                ],
                vec![
                    FlowNode::root(0),
                    FlowNode::line(1),
                    FlowNode::line(3),
                    FlowNode::leaf(2)
                ],
            ]
        );
        assert!(matches!(
            query_paths(&f, 7, &[]),
            Err(Error::OutletNotFound(7))
        ));
    }

    #[test]
    fn invalid_junctions_do_not_connect() {
        let (tags, assocs, mut js, segs) = example();
        js[1].valid = false;
        let f = prune_forest(&build_forest(&tags, &assocs, &js, &segs));
        assert_eq!(f.trees[0].inlets(), BTreeSet::from([1]));
    }

    #[test]
    fn outlets_share_lines() {
        let (mut tags, mut assocs, js, segs) = example();
        tags.push(tag_right(100, 350, TagKind::Outlet));
        assocs.push(assoc(3, 2));
        let f = prune_forest(&build_forest(&tags, &assocs, &js, &segs));
        assert_eq!(f.trees.len(), 2);
        let shared = f.shared_nodes();
        assert!(shared
            .iter()
            .any(|s| s.node == FlowNode::line(2) && s.outlets == vec![0, 3]));
    }

    #[test]
    fn cycles_terminate_and_flag_alternates() {
        let (tags, assocs, mut js, segs) = example();
        js.push(junction(2, 3, true));
        let built = build_forest(&tags, &assocs, &js, &segs);
        assert!(built.trees[0].alternates);
        let f = prune_forest(&built);
        assert!(f.violations().is_empty());
        assert_eq!(query_paths(&f, 0, &[]).unwrap().len(), 2);
    }

    #[test]
    fn pruning_examples() {
        let (tags, assocs, mut js, mut segs) = example();
        segs.push(seg(4, (0.0, 0.0), (1.0, 0.0)));
        js.push(junction(3, 4, true));
        let built = build_forest(&tags, &assocs, &js, &segs);
        assert!(built.trees[0]
            .nodes
            .iter()
            .any(|n| n.node == FlowNode::line(4)));
        let pruned = prune_forest(&built);
        assert!(!pruned.trees[0]
            .nodes
            .iter()
            .any(|n| n.node == FlowNode::line(4)));
        assert_eq!(prune_forest(&pruned), pruned);

        let lonely = vec![tag_right(100, 50, TagKind::Outlet)];
        let f = prune_forest(&build_forest(&lonely, &[assoc(0, 1)], &[], &segs));
        assert!(f.trees.is_empty());
        assert_eq!(f.dropped.len(), 1);
        let unassociated = build_forest(&lonely, &[], &[], &segs);
        assert_eq!(unassociated.dropped[0].outlet, 0);
    }

    #[test]
    fn paths_carry_decorations() {
        let (tags, assocs, js, segs) = example();
        let f = prune_forest(&build_forest(&tags, &assocs, &js, &segs));
        let deco = [
            Association {
                component: ComponentRef::Code(5),
                line: 2,
                distance: 1.0,
            },
            Association {
                component: ComponentRef::Symbol(0),
                line: 1,
                distance: 0.0,
            },
        ];
        let p = query_paths(&f, 0, &deco).unwrap();
        assert_eq!(p[0].steps[1].symbols, vec![0]);
        assert_eq!(p[0].steps[2].codes, vec![5]);
        assert!(p[1].steps[2].codes.is_empty());
        assert_eq!(query_all(&f, &deco).len(), 2);
    }
}

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use pidgraph::flow::{build_forest, prune_forest, Association, ComponentRef, FlowForest, NodeKind};
use pidgraph::geom::{BBox, Point};
use pidgraph::lines::{Junction, Segment};
use pidgraph::tags::{Direction, Tag, TagKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// An abstract line graph: junction edges between line ids and tags with
/// their (optional) associated line.
#[derive(Debug, Clone)]
pub struct GraphCase {
    pub lines: usize,
    pub edges: Vec<(usize, usize, bool)>,
    pub tags: Vec<(TagKind, Option<usize>)>,
}

impl GraphCase {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lines = rng.random_range(1..=30);
        let density = rng.random_range(0.02..0.25);
        let mut edges = Vec::new();
        for a in 0..lines {
            for b in a + 1..lines {
                if rng.random_bool(density) {
                    edges.push((a, b, rng.random_bool(0.8)));
                }
            }
        }
        let n_tags = rng.random_range(1..=10);
        let tags = (0..n_tags)
            .map(|_| {
                let kind = if rng.random_bool(0.35) {
                    TagKind::Outlet
                } else {
                    TagKind::Inlet
                };
                let line = rng.random_bool(0.9).then(|| rng.random_range(0..lines));
                (kind, line)
            })
            .collect();
        Self { lines, edges, tags }
    }

    pub fn has_cycle(&self) -> bool {
        let valid: Vec<_> = self.edges.iter().filter(|e| e.2).collect();
        // a forest on n vertices with c components has n - c edges
        let mut parent: Vec<usize> = (0..self.lines).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for &&(a, b, _) in &valid {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return true;
            }
            parent[ra] = rb;
        }
        false
    }

    pub fn inputs(&self) -> (Vec<Tag>, Vec<Association>, Vec<Junction>, Vec<Segment>) {
        let tags = self
            .tags
            .iter()
            .map(|&(kind, _)| {
                let bbox = BBox::new(0, 0, 95, 29);
                let v = [
                    Point::new(0.0, 0.0),
                    Point::new(80.0, 0.0),
                    Point::new(95.0, 15.0),
                    Point::new(80.0, 29.0),
                    Point::new(0.0, 29.0),
                ];
                Tag::new(v, bbox, Direction::Right, kind, Point::new(95.0, 15.0))
            })
            .collect();
        let assocs = self
            .tags
            .iter()
            .enumerate()
            .filter_map(|(i, &(_, l))| {
                l.map(|line| Association {
                    component: ComponentRef::Tag(i),
                    line,
                    distance: 0.0,
                })
            })
            .collect();
        let junctions = self
            .edges
            .iter()
            .map(|&(a, b, valid)| Junction {
                at: Point::default(),
                segments: (a, b),
                arm_count: if valid { 4 } else { 2 },
                crossings: [1; 4],
                valid,
            })
            .collect();
        let segments = (0..self.lines)
            .map(|i| Segment::new(i, Point::new(0.0, i as f64), Point::new(10.0, i as f64)))
            .collect();
        (tags, assocs, junctions, segments)
    }

    pub fn forest(&self) -> FlowForest {
        let (tags, assocs, junctions, segments) = self.inputs();
        prune_forest(&build_forest(&tags, &assocs, &junctions, &segments))
    }

    fn adjacency(&self) -> BTreeMap<usize, BTreeSet<usize>> {
        let mut g: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for &(a, b, valid) in &self.edges {
            if valid {
                g.entry(a).or_default().insert(b);
                g.entry(b).or_default().insert(a);
            }
        }
        g
    }

    /// Inlets whose line is reachable from the outlet's line, by plain BFS.
    pub fn reachable_inlets(&self, outlet: usize) -> Option<BTreeSet<usize>> {
        let start = self.tags[outlet].1?;
        let g = self.adjacency();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(l) = queue.pop_front() {
            for &n in g.get(&l).into_iter().flatten() {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        Some(
            self.tags
                .iter()
                .enumerate()
                .filter(|(_, &(k, l))| k == TagKind::Inlet && l.is_some_and(|l| seen.contains(&l)))
                .map(|(i, _)| i)
                .collect(),
        )
    }

    /// Every forest invariant plus agreement with the reachability oracle.
    pub fn check(&self) -> Result<(), String> {
        let forest = self.forest();
        let v = forest.violations();
        if !v.is_empty() {
            return Err(format!("violations: {v:?}"));
        }
        let again = prune_forest(&forest);
        if again != forest {
            return Err("prune is not idempotent".into());
        }
        let g = self.adjacency();
        for (i, &(kind, _)) in self.tags.iter().enumerate() {
            if kind != TagKind::Outlet {
                continue;
            }
            let expected = self.reachable_inlets(i).unwrap_or_default();
            match forest.tree(i) {
                None if expected.is_empty() => {
                    if !forest.dropped.iter().any(|d| d.outlet == i) {
                        return Err(format!("outlet {i} neither kept nor reported"));
                    }
                }
                None => return Err(format!("outlet {i} dropped but reaches {expected:?}")),
                Some(t) => {
                    if t.inlets() != expected {
                        return Err(format!(
                            "outlet {i}: inlets {:?} vs oracle {expected:?}",
                            t.inlets()
                        ));
                    }
                    let leaves = t
                        .nodes
                        .iter()
                        .filter(|n| n.node.kind == NodeKind::InletLeaf)
                        .count();
                    if leaves != expected.len() {
                        return Err(format!("outlet {i}: an inlet appears twice"));
                    }
                    for path in t.paths() {
                        let lines: Vec<usize> =
                            path[1..path.len() - 1].iter().map(|n| n.id).collect();
                        if lines.first().copied() != self.tags[i].1 {
                            return Err(format!("outlet {i}: path starts off its line"));
                        }
                        let inlet = path.last().unwrap().id;
                        if lines.last().copied() != self.tags[inlet].1 {
                            return Err(format!(
                                "outlet {i}: inlet {inlet} hangs off a foreign line"
                            ));
                        }
                        if lines
                            .windows(2)
                            .any(|w| !g.get(&w[0]).is_some_and(|n| n.contains(&w[1])))
                        {
                            return Err(format!("outlet {i}: path {lines:?} uses a non-edge"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

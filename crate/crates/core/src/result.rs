//! The versioned result document shared by extraction, ground truth,
//! evaluation, queries and overlays.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codes::PipelineCode;
use crate::error::{Error, Result};
use crate::flow::{Association, ComponentRef, DroppedTree, FlowForest, FlowTree, SharedNode};
use crate::lines::{Junction, Segment};
use crate::symbols::SymbolDetection;
use crate::tags::Tag;

pub const RESULT_SCHEMA: &str = "pid-graph/1";

/// A section entry carrying its cross-reference id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Indexed<T> {
    pub id: usize,
    #[serde(flatten)]
    pub item: T,
}

fn indexed<T: Clone>(items: &[T]) -> Vec<Indexed<T>> {
    items
        .iter()
        .cloned()
        .enumerate()
        .map(|(id, item)| Indexed { id, item })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSize {
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForestSection {
    pub trees: Vec<FlowTree>,
    pub shared: Vec<SharedNode>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub unassociated: Vec<ComponentRef>,
    pub dropped_trees: Vec<DroppedTree>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PidGraph {
    pub schema: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ground_truth: bool,
    pub image: ImageSize,
    pub codes: Vec<Indexed<PipelineCode>>,
    pub tags: Vec<Indexed<Tag>>,
    pub segments: Vec<Segment>,
    pub junctions: Vec<Indexed<Junction>>,
    pub symbols: Vec<Indexed<SymbolDetection>>,
    pub associations: Vec<Association>,
    pub forest: ForestSection,
    pub report: Report,
}

/// Plain component lists, the input side of [`PidGraph::assemble`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Components {
    pub codes: Vec<PipelineCode>,
    pub tags: Vec<Tag>,
    pub segments: Vec<Segment>,
    pub junctions: Vec<Junction>,
    pub symbols: Vec<SymbolDetection>,
    pub associations: Vec<Association>,
}

impl PidGraph {
    pub fn assemble(
        size: (usize, usize),
        parts: Components,
        forest: FlowForest,
        report: Report,
    ) -> Self {
        let mut report = report;
        report.dropped_trees = forest.dropped.clone();
        Self {
            schema: RESULT_SCHEMA.into(),
            ground_truth: false,
            image: ImageSize {
                width: size.0,
                height: size.1,
            },
            codes: indexed(&parts.codes),
            tags: indexed(&parts.tags),
            segments: parts.segments,
            junctions: indexed(&parts.junctions),
            symbols: indexed(&parts.symbols),
            associations: parts.associations,
            forest: ForestSection {
                shared: forest.shared_nodes(),
                trees: forest.trees,
            },
            report,
        }
    }

    pub fn code_list(&self) -> Vec<PipelineCode> {
        self.codes.iter().map(|c| c.item.clone()).collect()
    }

    pub fn tag_list(&self) -> Vec<Tag> {
        self.tags.iter().map(|t| t.item.clone()).collect()
    }

    pub fn symbol_list(&self) -> Vec<SymbolDetection> {
        self.symbols.iter().map(|s| s.item).collect()
    }

    pub fn junction_list(&self) -> Vec<Junction> {
        self.junctions.iter().map(|j| j.item).collect()
    }

    pub fn segment(&self, id: usize) -> Option<&Segment> {
        self.segments.iter().find(|s| s.id == id)
    }

    pub fn flow_forest(&self) -> FlowForest {
        FlowForest {
            trees: self.forest.trees.clone(),
            dropped: self.report.dropped_trees.clone(),
        }
    }

    /// Line id associated with a component, if any.
    pub fn line_of(&self, component: ComponentRef) -> Option<usize> {
        self.associations
            .iter()
            .find(|a| a.component == component)
            .map(|a| a.line)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes") + "\n"
    }

    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let g: PidGraph = serde_json::from_str(text).map_err(|e| Error::schema(context, &e))?;
        if g.schema != RESULT_SCHEMA {
            return Err(Error::Schema {
                context: context.into(),
                line: 0,
                column: 0,
                message: format!("expected schema {RESULT_SCHEMA:?}, found {:?}", g.schema),
            });
        }
        g.check_references(context)?;
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    fn check_references(&self, context: &str) -> Result<()> {
        let fail = |index: usize, message: String| Error::Validation {
            context: context.into(),
            index,
            message,
        };
        let ordered = |ids: &mut dyn Iterator<Item = usize>, what: &str| -> Result<()> {
            for (i, id) in ids.enumerate() {
                if id != i {
                    return Err(fail(i, format!("{what} id {id} out of sequence")));
                }
            }
            Ok(())
        };
        ordered(&mut self.codes.iter().map(|c| c.id), "code")?;
        ordered(&mut self.tags.iter().map(|c| c.id), "tag")?;
        ordered(&mut self.junctions.iter().map(|c| c.id), "junction")?;
        ordered(&mut self.symbols.iter().map(|c| c.id), "symbol")?;
        for (i, a) in self.associations.iter().enumerate() {
            if self.segment(a.line).is_none() {
                return Err(fail(
                    i,
                    format!("association names unknown line {}", a.line),
                ));
            }
            let present = match a.component {
                ComponentRef::Tag(t) => t < self.tags.len(),
                ComponentRef::Code(c) => c < self.codes.len(),
                ComponentRef::Symbol(s) => s < self.symbols.len(),
            };
            if !present {
                return Err(fail(
                    i,
                    format!("association names unknown {:?}", a.component),
                ));
            }
        }
        for (i, j) in self.junctions.iter().enumerate() {
            let (a, b) = j.item.segments;
            if self.segment(a).is_none() || self.segment(b).is_none() {
                return Err(fail(i, "junction names an unknown line".into()));
            }
        }
        Ok(())
    }
}

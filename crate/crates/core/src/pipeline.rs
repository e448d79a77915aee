//! End-to-end extraction in the fixed stage order: binarize, codes, tags,
//! symbols, lines, junctions, association, forest.

use crate::codes::{detect_text_blobs, filter_codes, TextRegion};
use crate::config::Config;
use crate::error::Result;
use crate::flow::{associate_codes, associate_symbols, associate_tags, build_forest, prune_forest};
use crate::lines::{compute_intersections, detect_segments, validate_intersection};
use crate::raster::{binarize, erase_regions, skeletonize, GrayImage};
use crate::result::{Components, PidGraph, Report};
use crate::symbols::{
    builtin_library, heal_symbols, load_library, match_templates, SymbolDetection,
};
use crate::tags::find_tags;

/// Externally produced detections that replace the built-in fallbacks.
#[derive(Debug, Clone, Default)]
pub struct ExtractInputs {
    pub text_regions: Option<Vec<TextRegion>>,
    pub symbols: Option<Vec<SymbolDetection>>,
}

pub fn extract(image: &GrayImage, inputs: &ExtractInputs, config: &Config) -> Result<PidGraph> {
    config.validate()?;
    let mut report = Report::default();
    let ink = binarize(image);
    let margin = config.erase_margin;

    let regions = match &inputs.text_regions {
        Some(r) => r.clone(),
        None => detect_text_blobs(&ink, &config.text_blobs),
    };
    let filtered = filter_codes(&regions, &config.grammar);
    if !filtered.untranscribed.is_empty() {
        report.warnings.push(format!(
            "{} text regions carry no transcription and were not checked against the code grammar",
            filtered.untranscribed.len()
        ));
    }
    let text_boxes: Vec<_> = regions.iter().map(|r| r.bbox.expand(margin)).collect();
    let no_text = erase_regions(&ink, &text_boxes);

    let scan = find_tags(&no_text, &config.tags);
    for (cand, err) in &scan.rejected {
        report.warnings.push(format!(
            "tag candidate at {:?} skipped: {err}",
            cand.bbox.to_array()
        ));
    }
    let tag_boxes: Vec<_> = scan
        .tags
        .iter()
        .map(|t| t.bbox.expand(margin + 1))
        .collect();
    let bare = erase_regions(&no_text, &tag_boxes);

    let symbols = match &inputs.symbols {
        Some(s) => s.clone(),
        None if config.match_symbols => {
            let library = match &config.template_dir {
                Some(dir) => load_library(dir)?,
                None => builtin_library(),
            };
            match_templates(&bare, &library, config.symbol_threshold)
        }
        None => Vec::new(),
    };

    let skeleton = skeletonize(&heal_symbols(&bare, &symbols));
    let segments = detect_segments(&skeleton, &config.hough, &config.merge);
    let junctions: Vec<_> = compute_intersections(&segments)
        .iter()
        .map(|c| validate_intersection(&bare, c, config.junction_window))
        .collect();

    let tag_assoc = associate_tags(&scan.tags, &segments, config.tag_max_dist);
    let code_assoc = associate_codes(&filtered.codes, &segments, config.code_max_dist);
    let symbol_assoc = associate_symbols(&symbols, &segments, config.symbol_max_gap);

    let forest = build_forest(&scan.tags, &tag_assoc.matched, &junctions, &segments);
    for t in forest.trees.iter().filter(|t| t.alternates) {
        report.warnings.push(format!(
            "outlet {}: alternate routes existed; the first-discovered parent was kept",
            t.outlet
        ));
    }
    let forest = prune_forest(&forest);

    report.unassociated = tag_assoc
        .unassociated
        .iter()
        .chain(&code_assoc.unassociated)
        .chain(&symbol_assoc.unassociated)
        .copied()
        .collect();
    let associations = [tag_assoc.matched, code_assoc.matched, symbol_assoc.matched].concat();

    let parts = Components {
        codes: filtered.codes,
        tags: scan.tags,
        segments,
        junctions,
        symbols,
        associations,
    };
    Ok(PidGraph::assemble(
        (image.width(), image.height()),
        parts,
        forest,
        report,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_sheet_yields_empty_graph() {
        let img = GrayImage::filled(300, 200, 255).unwrap();
        let g = extract(&img, &ExtractInputs::default(), &Config::default()).unwrap();
        assert!(g.codes.is_empty() && g.tags.is_empty() && g.segments.is_empty());
        assert!(g.symbols.is_empty() && g.forest.trees.is_empty());
        assert!(g.report.warnings.is_empty());
    }
}

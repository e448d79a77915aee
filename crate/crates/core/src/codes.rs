//! Text regions and pipeline-code filtering.
//!
//! Regions either come from an external text detector (ingested JSON with
//! transcriptions) or from the classical blob grouper below, which yields
//! boxes without text. Only transcribed regions can become codes.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::BBox;
use crate::raster::{connected_components, BinaryImage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextRegion {
    pub bbox: BBox,
    pub text: Option<String>,
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token {
    Digit,
    Alpha,
    Literal(char),
}

impl Token {
    fn accepts(self, c: char) -> bool {
        match self {
            Token::Digit => c.is_ascii_digit(),
            Token::Alpha => c.is_ascii_alphabetic(),
            Token::Literal(l) => c == l,
        }
    }
}

/// Positional code format: `N` = digit, `A` = letter (either case), any other
/// printable ASCII character is literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeGrammar {
    tokens: Vec<Token>,
}

pub const DEFAULT_GRAMMAR: &str = "N\"-AANNNNNNN-NNNNNA-AA";

impl CodeGrammar {
    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Full-string positional match after trimming surrounding whitespace.
    pub fn validate(&self, text: &str) -> bool {
        let text = text.trim();
        text.chars().count() == self.tokens.len()
            && text.chars().zip(&self.tokens).all(|(c, t)| t.accepts(c))
    }
}

impl Default for CodeGrammar {
    fn default() -> Self {
        DEFAULT_GRAMMAR.parse().expect("default grammar is valid")
    }
}

impl FromStr for CodeGrammar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::param("grammar", "empty pattern"));
        }
        let tokens = s
            .chars()
            .map(|c| match c {
                'N' => Ok(Token::Digit),
                'A' => Ok(Token::Alpha),
                c if c.is_ascii_graphic() || c == ' ' => Ok(Token::Literal(c)),
                c => Err(Error::param(
                    "grammar",
                    format!("non-printable literal {c:?}"),
                )),
            })
            .collect::<Result<_>>()?;
        Ok(Self { tokens })
    }
}

impl fmt::Display for CodeGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tokens {
            let c = match t {
                Token::Digit => 'N',
                Token::Alpha => 'A',
                Token::Literal(c) => *c,
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl Serialize for CodeGrammar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CodeGrammar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn validate_code(text: &str, grammar: &CodeGrammar) -> bool {
    grammar.validate(text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineCode {
    pub text: String,
    pub bbox: BBox,
}

/// Result of [`filter_codes`]: accepted codes plus the indices of regions that
/// carried no transcription.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CodeFilter {
    pub codes: Vec<PipelineCode>,
    pub untranscribed: Vec<usize>,
}

pub fn filter_codes(regions: &[TextRegion], grammar: &CodeGrammar) -> CodeFilter {
    let mut out = CodeFilter::default();
    for (i, r) in regions.iter().enumerate() {
        match &r.text {
            None => out.untranscribed.push(i),
            Some(t) if grammar.validate(t) => out.codes.push(PipelineCode {
                text: t.trim().to_string(),
                bbox: r.bbox,
            }),
            Some(_) => {}
        }
    }
    out
}

/// Parses the detections JSON document (a list of region records).
///
/// `bounds` is the sheet size; boxes outside it are rejected.
pub fn parse_text_regions(json: &str, bounds: Option<(usize, usize)>) -> Result<Vec<TextRegion>> {
    const CTX: &str = "text detections";
    let regions: Vec<TextRegion> =
        serde_json::from_str(json).map_err(|e| Error::schema(CTX, &e))?;
    for (index, r) in regions.iter().enumerate() {
        let fail = |message: String| Error::Validation {
            context: CTX.into(),
            index,
            message,
        };
        if !r.bbox.is_valid() {
            return Err(fail(format!(
                "bbox {:?} has x1 < x0 or y1 < y0",
                r.bbox.to_array()
            )));
        }
        if let Some((w, h)) = bounds {
            if !r.bbox.within(w, h) {
                return Err(fail(format!(
                    "bbox {:?} outside {w}x{h} sheet",
                    r.bbox.to_array()
                )));
            }
        }
        if let Some(c) = r.confidence {
            if !(0.0..=1.0).contains(&c) {
                return Err(fail(format!("confidence {c} outside [0, 1]")));
            }
        }
    }
    Ok(regions)
}

pub fn ingest_text_regions(
    path: impl AsRef<Path>,
    bounds: Option<(usize, usize)>,
) -> Result<Vec<TextRegion>> {
    let path = path.as_ref();
    let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_text_regions(&json, bounds).map_err(|e| match e {
        Error::Schema {
            line,
            column,
            message,
            ..
        } => Error::Schema {
            context: path.display().to_string(),
            line,
            column,
            message,
        },
        Error::Validation { index, message, .. } => Error::Validation {
            context: path.display().to_string(),
            index,
            message,
        },
        e => e,
    })
}

/// Gates for the classical glyph grouper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlobGates {
    /// Minimum bounding-box area of a grouped word.
    pub min_area: i64,
    /// Maximum bounding-box area of a single glyph component.
    pub max_area: i64,
    pub max_height: i32,
    pub max_width: i32,
    /// Horizontal gap bridged when grouping glyphs into words.
    pub merge_gap: i32,
}

impl Default for BlobGates {
    fn default() -> Self {
        Self {
            min_area: 15,
            max_area: 2000,
            max_height: 40,
            max_width: 40,
            merge_gap: 10,
        }
    }
}

/// Groups glyph-sized components into word-level boxes (no transcription).
pub fn detect_text_blobs(image: &BinaryImage, gates: &BlobGates) -> Vec<TextRegion> {
    let glyphs: Vec<BBox> = connected_components(image)
        .into_iter()
        .map(|c| c.bbox)
        .filter(|b| {
            b.area() <= gates.max_area
                && b.height() <= gates.max_height
                && b.width() <= gates.max_width
        })
        .collect();

    let mut parent: Vec<usize> = (0..glyphs.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut order: Vec<usize> = (0..glyphs.len()).collect();
    order.sort_by_key(|&i| (glyphs[i].x0, glyphs[i].y0));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if glyphs[j].x0 - glyphs[i].x1 - 1 > gates.merge_gap.max(0) + gates.max_width {
                break;
            }
            let (a, b) = (glyphs[i], glyphs[j]);
            let gap = (b.x0 - a.x1 - 1).max(a.x0 - b.x1 - 1);
            let v_overlap = a.y0.max(b.y0) <= a.y1.min(b.y1);
            if gap <= gates.merge_gap && v_overlap {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }

    let mut words: Vec<Option<BBox>> = vec![None; glyphs.len()];
    for (i, &g) in glyphs.iter().enumerate() {
        let r = find(&mut parent, i);
        words[r] = Some(words[r].map_or(g, |b| b.union(g)));
    }
    let mut boxes: Vec<BBox> = words
        .into_iter()
        .flatten()
        .filter(|b| b.area() >= gates.min_area)
        .collect();
    boxes.sort_by_key(|b| (b.y0, b.x0, b.y1, b.x1));
    boxes.dedup();
    boxes
        .into_iter()
        .map(|bbox| TextRegion {
            bbox,
            text: None,
            confidence: None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grammar_examples() {
        let g = CodeGrammar::default();
        assert_eq!(g.len(), 22);
        assert!(validate_code("6\"-PP1234567-12345A-AB", &g));
        assert!(!validate_code("ABC-123", &g));
        assert!(!validate_code("66\"-PP1234567-12345A-AB", &g));
    }

    #[test]
    fn case_and_whitespace() {
        let g = CodeGrammar::default();
        assert!(g.validate("  6\"-pp1234567-12345a-ab\n"));
        assert!(!g.validate("6\"-PP12345٣7-12345A-AB"));
    }

    #[test]
    fn grammar_round_trips_through_display() {
        let g: CodeGrammar = "NN/AA".parse().unwrap();
        assert_eq!(g.to_string(), "NN/AA");
        assert!(g.validate("12/xy"));
        assert!("".parse::<CodeGrammar>().is_err());
        assert!("N\tA".parse::<CodeGrammar>().is_err());
    }

    fn region(text: Option<&str>) -> TextRegion {
        TextRegion {
            bbox: BBox::new(0, 0, 10, 5),
            text: text.map(str::to_string),
            confidence: None,
        }
    }

    #[test]
    fn filter_keeps_only_valid() {
        let g = CodeGrammar::default();
        let regions = vec![
            region(Some("6\"-PP1234567-12345A-AB")),
            region(Some("PI-101")),
            region(None),
            region(Some("2\"-XY7654321-99999Z-QQ")),
        ];
        let f = filter_codes(&regions, &g);
        assert_eq!(f.codes.len(), 2);
        assert_eq!(f.untranscribed, vec![2]);
        assert!(filter_codes(&[], &g).codes.is_empty());
    }

    #[test]
    fn ingest_validation() {
        let ok = r#"[{"bbox":[0,0,4,4],"text":"a","confidence":0.5},
                     {"bbox":[1,1,2,2],"text":null,"confidence":null},
                     {"bbox":[3,3,9,9],"text":"b","confidence":null}]"#;
        assert_eq!(parse_text_regions(ok, Some((10, 10))).unwrap().len(), 3);
        assert!(parse_text_regions("[]", None).unwrap().is_empty());

        let bad = r#"[{"bbox":[0,0,4,4],"text":"a","confidence":null},
                      {"bbox":[5,0,4,4],"text":"b","confidence":null}]"#;
        match parse_text_regions(bad, None) {
            Err(Error::Validation { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_text_regions(
                r#"[{"bbox":[0,0,40,4],"text":null,"confidence":null}]"#,
                Some((10, 10))
            ),
            Err(Error::Validation { index: 0, .. })
        ));
        assert!(matches!(
            parse_text_regions("[{\"bbox\":[0,0]}]", None),
            Err(Error::Schema { line: 1, .. })
        ));
    }

    #[test]
    fn blobs_ignore_long_lines_and_blank() {
        let blank = BinaryImage::new(600, 50).unwrap();
        assert!(detect_text_blobs(&blank, &BlobGates::default()).is_empty());
        let mut line = blank.clone();
        for x in 50..550 {
            line.set(x, 20, true);
        }
        assert!(detect_text_blobs(&line, &BlobGates::default()).is_empty());
    }

    #[test]
    fn blobs_group_glyphs() {
        let mut img = BinaryImage::new(200, 60).unwrap();
        // three 8x12 "glyphs" 3 px apart, and one far away
        for gx in [20, 31, 42, 150] {
            for y in 20..32 {
                for x in gx..gx + 8 {
                    if (x + y) % 3 != 0 {
                        img.set(x, y, true);
                    }
                }
            }
        }
        let blobs = detect_text_blobs(&img, &BlobGates::default());
        assert_eq!(blobs.len(), 2);
        assert_eq!(blobs[0].bbox, BBox::new(20, 20, 49, 31));
        assert!(blobs.iter().all(|b| b.text.is_none()));
    }
}

//! Every pipeline tunable in one JSON document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::codes::{BlobGates, CodeGrammar};
use crate::error::{Error, Result};
use crate::lines::{HoughParams, MergeParams};
use crate::symbols::AnnotationConfig;
use crate::tags::TagParams;

pub const CONFIG_SCHEMA: &str = "pid-graph-config/1";
pub const CONFIG_ENV: &str = "PID_GRAPH_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub schema: String,
    pub grammar: CodeGrammar,
    pub text_blobs: BlobGates,
    pub tags: TagParams,
    pub hough: HoughParams,
    pub merge: MergeParams,
    /// Side of the junction probe window.
    pub junction_window: usize,
    pub tag_max_dist: f64,
    pub code_max_dist: f64,
    pub symbol_max_gap: f64,
    pub symbol_threshold: f64,
    /// Run the built-in template matcher when no detections file is given.
    pub match_symbols: bool,
    /// Template library directory replacing the built-in glyphs.
    pub template_dir: Option<PathBuf>,
    /// Padding around text and tag boxes when erasing them.
    pub erase_margin: i32,
    pub annotation: AnnotationConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            schema: CONFIG_SCHEMA.into(),
            grammar: CodeGrammar::default(),
            text_blobs: BlobGates::default(),
            tags: TagParams::default(),
            hough: HoughParams::default(),
            merge: MergeParams::default(),
            junction_window: 21,
            tag_max_dist: 30.0,
            code_max_dist: 30.0,
            symbol_max_gap: 20.0,
            symbol_threshold: 0.8,
            match_symbols: true,
            template_dir: None,
            erase_margin: 1,
            annotation: AnnotationConfig::default(),
        }
    }
}

impl Config {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| Error::schema(context, &e))?;
        if cfg.schema != CONFIG_SCHEMA {
            return Err(Error::Schema {
                context: context.into(),
                line: 0,
                column: 0,
                message: format!("expected schema {CONFIG_SCHEMA:?}, found {:?}", cfg.schema),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Explicit path, else `PID_GRAPH_CONFIG`, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(PathBuf::from(p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.junction_window < 3 || self.junction_window.is_multiple_of(2) {
            return Err(Error::param(
                "junction_window",
                "must be odd and at least 3",
            ));
        }
        for (name, v) in [
            ("tag_max_dist", self.tag_max_dist),
            ("code_max_dist", self.code_max_dist),
            ("symbol_max_gap", self.symbol_max_gap),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, "must be a finite non-negative distance"));
            }
        }
        if !(self.symbol_threshold > 0.0 && self.symbol_threshold <= 1.0) {
            return Err(Error::param("symbol_threshold", "must lie in (0, 1]"));
        }
        if self.erase_margin < 0 {
            return Err(Error::param("erase_margin", "must be non-negative"));
        }
        self.annotation.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = Config::default();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(Config::from_json(&json, "t").unwrap(), cfg);
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let cfg = Config::from_json(
            r#"{"schema":"pid-graph-config/1","tag_max_dist":12,"hough":{"votes":30}}"#,
            "t",
        )
        .unwrap();
        assert_eq!(cfg.tag_max_dist, 12.0);
        assert_eq!(cfg.hough.votes, 30);
        assert_eq!(
            cfg.hough.min_line_length,
            HoughParams::default().min_line_length
        );
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(
            Config::from_json(r#"{"schema":"other/1"}"#, "t"),
            Err(Error::Schema { .. })
        ));
        assert!(matches!(
            Config::from_json(r#"{"bogus":1}"#, "t"),
            Err(Error::Schema { .. })
        ));
        assert!(matches!(
            Config::from_json(r#"{"junction_window":20}"#, "t"),
            Err(Error::Parameter {
                name: "junction_window",
                ..
            })
        ));
    }
}

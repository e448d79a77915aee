use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{generate_sheet, SheetSpec};
use crate::error::{Error, Result};

pub const CORPUS_SCHEMA: &str = "pid-graph-corpus/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetFiles {
    pub image: String,
    pub truth: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub seed: u64,
    pub files: SheetFiles,
    /// Hex SHA-256 of the image, truth and text files, in that order.
    pub sha256: [String; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub schema: String,
    pub spec: SheetSpec,
    pub entries: Vec<CorpusEntry>,
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<SheetSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: SheetSpec =
        serde_json::from_str(&text).map_err(|e| Error::schema(path.display().to_string(), &e))?;
    spec.validate()?;
    Ok(spec)
}

fn digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write(path: &Path, text: String) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Generates one sheet into `dir` as `sheet_<seed>.png`, `.gt.json` and
/// `.text.json`.
pub fn write_sheet(spec: &SheetSpec, seed: u64, dir: impl AsRef<Path>) -> Result<CorpusEntry> {
    let dir = dir.as_ref();
    let (image, truth) = generate_sheet(spec, seed)?;
    let stem = format!("sheet_{seed:04}");
    let files = SheetFiles {
        image: format!("{stem}.png"),
        truth: format!("{stem}.gt.json"),
        text: format!("{stem}.text.json"),
    };
    let paths: [PathBuf; 3] = [
        dir.join(&files.image),
        dir.join(&files.truth),
        dir.join(&files.text),
    ];
    image.save_png(&paths[0])?;
    write(&paths[1], truth.graph.to_json())?;
    write(
        &paths[2],
        serde_json::to_string_pretty(&truth.text_regions).expect("regions serialize") + "\n",
    )?;
    Ok(CorpusEntry {
        seed,
        files,
        sha256: [digest(&paths[0])?, digest(&paths[1])?, digest(&paths[2])?],
    })
}

/// Writes `manifest.json` for entries produced by [`write_sheet`].
pub fn finish_corpus(
    spec: &SheetSpec,
    mut entries: Vec<CorpusEntry>,
    dir: impl AsRef<Path>,
) -> Result<CorpusManifest> {
    entries.sort_by_key(|e| e.seed);
    let manifest = CorpusManifest {
        schema: CORPUS_SCHEMA.into(),
        spec: spec.clone(),
        entries,
    };
    let path = dir.as_ref().join("manifest.json");
    write(
        &path,
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )?;
    Ok(manifest)
}

pub fn corpus(
    spec: &SheetSpec,
    seeds: Range<u64>,
    dir: impl AsRef<Path>,
) -> Result<CorpusManifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let entries = seeds
        .map(|s| write_sheet(spec, s, dir))
        .collect::<Result<Vec<_>>>()?;
    finish_corpus(spec, entries, dir)
}

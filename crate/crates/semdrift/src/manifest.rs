//! `ingest.json` and `manifest.json`: everything needed to rerun a stage bit for bit.
//! Neither records timestamps or absolute paths, so reruns produce identical bytes.

use std::path::Path;

use semdrift_core::chrono::ChainDirection;
use semdrift_core::corpus::TimeSpanConfig;
use semdrift_core::sgns::TrainingConfig;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, IoContext, Result};

pub const INGEST_FORMAT: &str = "semdrift-ingest/1";
pub const MODEL_FORMAT: &str = "semdrift-model/1";

pub const INGEST_FILE: &str = "ingest.json";
pub const MODEL_FILE: &str = "manifest.json";
pub const VOCAB_FILE: &str = "vocab.tsv";
pub const OCCURRENCES_FILE: &str = "occurrences.tsv";
pub const SPANS_DIR: &str = "spans";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSpan {
    pub index: usize,
    pub label: String,
    /// Relative to the ingest directory.
    pub file: String,
    pub documents: usize,
    pub sentences: u64,
    pub tokens: u64,
    /// Tokens left after the min-count filter.
    pub retained_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabInfo {
    pub size: usize,
    pub min_count: u64,
    pub alpha: f64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestManifest {
    pub format: String,
    pub time: TimeSpanConfig,
    pub documents: usize,
    pub out_of_range: usize,
    pub empty_documents: usize,
    pub spans: Vec<IngestSpan>,
    pub vocabulary: VocabInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpan {
    pub index: usize,
    pub label: String,
    pub file: String,
    pub tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub format: String,
    pub training: TrainingConfig,
    pub direction: ChainDirection,
    /// Per-span epoch overrides, indexed by span.
    pub span_epochs: Option<Vec<u32>>,
    pub time: TimeSpanConfig,
    pub vocabulary: VocabInfo,
    /// SHA-256 of the `ingest.json` the model was trained from.
    pub ingest_sha256: String,
    pub spans: Vec<ModelSpan>,
    pub training_order: Vec<usize>,
    /// Spans whose space file is final, in training order.
    pub completed: Vec<usize>,
}

impl ModelManifest {
    pub fn is_complete(&self) -> bool {
        self.completed.len() == self.spans.len()
    }

    /// True when `other` describes the same run, ignoring progress.
    pub fn same_run(&self, other: &ModelManifest) -> bool {
        let strip = |m: &ModelManifest| ModelManifest {
            completed: Vec::new(),
            ..m.clone()
        };
        strip(self) == strip(other)
    }
}

pub fn space_file_name(index: usize, label: &str) -> String {
    format!("span_{index:02}_{label}.bin")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("manifest types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    crate::write_atomic(path, to_json(value).as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).at(path)?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_ingest(dir: &Path) -> Result<IngestManifest> {
    let path = dir.join(INGEST_FILE);
    let m: IngestManifest = read_json(&path)?;
    if m.format != INGEST_FORMAT {
        return Err(Error::format(&path, format!("unsupported format {:?}", m.format)));
    }
    Ok(m)
}

pub fn read_model(dir: &Path) -> Result<ModelManifest> {
    let path = dir.join(MODEL_FILE);
    let m: ModelManifest = read_json(&path)?;
    if m.format != MODEL_FORMAT {
        return Err(Error::format(&path, format!("unsupported format {:?}", m.format)));
    }
    Ok(m)
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).at(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

//! Synthetic corpus specs as TOML, and their expansion into a corpus directory.
//!
//! A spec is a `[time]` table plus the generator fields at top level, with one
//! `[[targets]]` table per planted word. Mixture and occurrence schedules may be written
//! in full or as `{ default = x, from = { "10" = y } }`, where each entry sets every span
//! from its index onwards, and `at = { "7" = z }` sets single spans.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use semdrift_core::corpus::{
    GroundTruth, PlantedTarget, SyntheticCorpus, SyntheticShiftSpec, TimeSpanConfig,
    DEFAULT_BACKGROUND_TOPICS, DEFAULT_SHIFT_THRESHOLD,
};
use serde::{Deserialize, Serialize};

use crate::corpus_io::SpanWriter;
use crate::error::{Error, IoContext, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Schedule<T> {
    Full(Vec<T>),
    Steps {
        default: T,
        #[serde(default)]
        from: BTreeMap<String, T>,
        #[serde(default)]
        at: BTreeMap<String, T>,
    },
}

impl<T: Copy> Schedule<T> {
    pub fn expand(&self, spans: usize) -> std::result::Result<Vec<T>, String> {
        match self {
            Schedule::Full(v) => Ok(v.clone()),
            Schedule::Steps { default, from, at } => {
                let index = |k: &String| {
                    k.parse::<usize>()
                        .ok()
                        .filter(|&i| i < spans)
                        .ok_or_else(|| format!("span key {k:?} is not an index below {spans}"))
                };
                let mut out = vec![*default; spans];
                let mut steps = from
                    .iter()
                    .map(|(k, v)| Ok((index(k)?, *v)))
                    .collect::<std::result::Result<Vec<_>, String>>()?;
                steps.sort_by_key(|s| s.0);
                for (i, v) in steps {
                    out[i..].fill(v);
                }
                for (k, v) in at {
                    out[index(k)?] = *v;
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    pub target_word: String,
    pub sense_a_context_pool: Vec<String>,
    pub sense_b_context_pool: Vec<String>,
    pub per_span_mixture: Schedule<f64>,
    pub per_span_target_occurrences: Schedule<u32>,
}

fn default_zipf() -> f64 {
    1.1
}

fn default_topics() -> usize {
    DEFAULT_BACKGROUND_TOPICS
}

fn default_true() -> bool {
    true
}

fn default_threshold() -> f64 {
    DEFAULT_SHIFT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthFile {
    pub time: TimeSpanConfig,
    pub background_vocab_size: usize,
    pub sentence_length: usize,
    pub background_sentences_per_span: usize,
    pub seed: u64,
    #[serde(default = "default_zipf")]
    pub zipf_exponent: f64,
    #[serde(default = "default_topics")]
    pub background_topics: usize,
    #[serde(default = "default_true")]
    pub pools_as_topics: bool,
    #[serde(default = "default_threshold")]
    pub shift_threshold: f64,
    pub targets: Vec<TargetFile>,
}

impl SynthFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).at(path)?;
        toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn spec(&self) -> Result<SyntheticShiftSpec> {
        self.time.validate()?;
        let spans = self.time.span_count();
        let targets = self
            .targets
            .iter()
            .map(|t| {
                let bad = |m: String| Error::Usage(format!("target {:?}: {m}", t.target_word));
                Ok(PlantedTarget {
                    target_word: t.target_word.clone(),
                    sense_a_context_pool: t.sense_a_context_pool.clone(),
                    sense_b_context_pool: t.sense_b_context_pool.clone(),
                    per_span_mixture: t.per_span_mixture.expand(spans).map_err(bad)?,
                    per_span_target_occurrences: t
                        .per_span_target_occurrences
                        .expand(spans)
                        .map_err(bad)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SyntheticShiftSpec {
            targets,
            background_vocab_size: self.background_vocab_size,
            sentence_length: self.sentence_length,
            background_sentences_per_span: self.background_sentences_per_span,
            seed: self.seed,
            zipf_exponent: self.zipf_exponent,
            background_topics: self.background_topics,
            pools_as_topics: self.pools_as_topics,
            shift_threshold: self.shift_threshold,
        })
    }

    /// The same spec with every schedule written out in full.
    pub fn normalized(&self) -> Result<SynthFile> {
        let spec = self.spec()?;
        let mut out = self.clone();
        for (t, s) in out.targets.iter_mut().zip(spec.targets) {
            t.per_span_mixture = Schedule::Full(s.per_span_mixture);
            t.per_span_target_occurrences = Schedule::Full(s.per_span_target_occurrences);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub time: TimeSpanConfig,
    pub span_labels: Vec<String>,
    pub span_tokens: Vec<u64>,
    pub ground_truth: GroundTruth,
}

/// Writes one `<first year>.txt` document per span into `out/corpus`, plus
/// `ground_truth.json` and the fully expanded spec as `synth.toml`.
pub fn generate(file: &SynthFile, out: &Path) -> Result<SynthSummary> {
    let spec = file.spec()?;
    let corpus = SyntheticCorpus::new(spec, &file.time)?;
    let truth = corpus.ground_truth();
    for w in &truth.warnings {
        log::warn!("{w}");
    }
    let dir = out.join("corpus");
    fs::create_dir_all(&dir).at(&dir)?;
    let lexicon = corpus.lexicon();
    let mut span_tokens = Vec::with_capacity(corpus.span_count());
    let mut span_labels = Vec::with_capacity(corpus.span_count());
    for t in 0..corpus.span_count() {
        let (first, _) = file.time.span_years(t);
        let mut w = SpanWriter::create(dir.join(format!("{first}.txt")))?;
        let span = corpus.generate_span(t);
        let mut tokens = 0u64;
        for s in &span.sentences {
            let words: Vec<&str> = s.iter().map(|&i| lexicon[i as usize].as_str()).collect();
            w.sentence(&words)?;
            tokens += words.len() as u64;
        }
        w.finish()?;
        log::info!("span {t} ({}): {tokens} tokens", file.time.span_label(t));
        span_tokens.push(tokens);
        span_labels.push(file.time.span_label(t));
    }
    let summary = SynthSummary {
        time: file.time,
        span_labels,
        span_tokens,
        ground_truth: truth,
    };
    crate::manifest::write_json(&out.join("ground_truth.json"), &summary)?;
    let normalized = toml::to_string(&file.normalized()?)
        .map_err(|e| Error::Data(format!("cannot serialize spec: {e}")))?;
    crate::write_atomic(&out.join("synth.toml"), normalized.as_bytes())?;
    Ok(summary)
}

//! Synthetic corpora with a planted sense shift.
//!
//! Each span mixes background sentences, drawn from a Zipf-ranked vocabulary of generated
//! pseudo-words, with target sentences: the target word surrounded by words from sense pool A
//! or, with probability `per_span_mixture[t]`, sense pool B.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashSet;
use rand::Rng;

use super::{tokenize, TimeSpanConfig, TokenizedSpan};
use crate::rng::{self, ChaCha8Rng};
use crate::{math, Error, Result};

pub const DEFAULT_SHIFT_THRESHOLD: f64 = 0.25;
pub const DEFAULT_BACKGROUND_TOPICS: usize = 5;

#[cfg(feature = "serde")]
fn default_zipf_exponent() -> f64 {
    1.1
}

#[cfg(feature = "serde")]
fn default_topics() -> usize {
    DEFAULT_BACKGROUND_TOPICS
}

#[cfg(feature = "serde")]
fn default_true() -> bool {
    true
}

#[cfg(feature = "serde")]
fn default_threshold() -> f64 {
    DEFAULT_SHIFT_THRESHOLD
}

/// One word whose contexts follow a two-sense mixture schedule.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlantedTarget {
    pub target_word: String,
    pub sense_a_context_pool: Vec<String>,
    pub sense_b_context_pool: Vec<String>,
    /// Probability that an occurrence in span `t` uses sense B.
    pub per_span_mixture: Vec<f64>,
    pub per_span_target_occurrences: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticShiftSpec {
    pub targets: Vec<PlantedTarget>,
    pub background_vocab_size: usize,
    pub sentence_length: usize,
    pub background_sentences_per_span: usize,
    pub seed: u64,
    #[cfg_attr(feature = "serde", serde(default = "default_zipf_exponent"))]
    pub zipf_exponent: f64,
    /// Background words are split into this many topics; a sentence draws from one topic.
    #[cfg_attr(feature = "serde", serde(default = "default_topics"))]
    pub background_topics: usize,
    /// Each context pool also forms a background topic, so pool words occur outside
    /// target sentences in every span.
    #[cfg_attr(feature = "serde", serde(default = "default_true"))]
    pub pools_as_topics: bool,
    /// Mixture level whose upward crossing defines the ground-truth shift span.
    #[cfg_attr(feature = "serde", serde(default = "default_threshold"))]
    pub shift_threshold: f64,
}

impl SyntheticShiftSpec {
    pub fn validate(&self, spans: usize) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::config("no target words"));
        }
        if self.background_vocab_size == 0 {
            return Err(Error::config("background vocabulary is empty"));
        }
        if self.sentence_length < 2 {
            return Err(Error::config("sentence length must be at least 2"));
        }
        if self.background_topics == 0 || self.background_topics > self.background_vocab_size {
            return Err(Error::config(
                "background topics must be between 1 and the background vocabulary size",
            ));
        }
        if !(self.zipf_exponent.is_finite() && self.zipf_exponent > 0.0) {
            return Err(Error::config("zipf exponent must be positive"));
        }
        if !(0.0..=1.0).contains(&self.shift_threshold) {
            return Err(Error::config("shift threshold must lie in [0, 1]"));
        }
        let mut targets = BTreeSet::new();
        for t in &self.targets {
            if !targets.insert(t.target_word.as_str()) {
                return Err(Error::config(format!(
                    "target {:?} listed twice",
                    t.target_word
                )));
            }
        }
        for t in &self.targets {
            let name = &t.target_word;
            check_word(name)?;
            if t.sense_a_context_pool.is_empty() || t.sense_b_context_pool.is_empty() {
                return Err(Error::config(format!("{name}: context pools must be non-empty")));
            }
            let a: BTreeSet<&str> = t.sense_a_context_pool.iter().map(String::as_str).collect();
            for w in &t.sense_b_context_pool {
                if a.contains(w.as_str()) {
                    return Err(Error::OverlappingPools(w.clone()));
                }
            }
            for w in t.sense_a_context_pool.iter().chain(&t.sense_b_context_pool) {
                check_word(w)?;
                if targets.contains(w.as_str()) {
                    return Err(Error::config(format!(
                        "{name}: target word {w:?} appears in a context pool"
                    )));
                }
            }
            if t.per_span_mixture.len() != spans || t.per_span_target_occurrences.len() != spans {
                return Err(Error::config(format!(
                    "{name}: schedules need exactly {spans} entries"
                )));
            }
            if let Some(m) = t
                .per_span_mixture
                .iter()
                .find(|m| !(0.0..=1.0).contains(*m))
            {
                return Err(Error::config(format!("{name}: mixture {m} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// First span whose mixture reaches the threshold coming from below.
    ///
    /// A schedule that starts at or above the threshold has no crossing there.
    pub fn shift_span(&self, target: &PlantedTarget) -> Option<usize> {
        let m = &target.per_span_mixture;
        (1..m.len()).find(|&t| m[t - 1] < self.shift_threshold && m[t] >= self.shift_threshold)
    }
}

fn check_word(w: &str) -> Result<()> {
    let toks = tokenize(w);
    if toks.len() != 1 || toks[0] != w {
        return Err(Error::config(format!(
            "{w:?} is not a lowercase alphabetic token"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TargetTruth {
    pub word: String,
    pub shift_span: Option<usize>,
    pub per_span_mixture: Vec<f64>,
    pub per_span_target_occurrences: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroundTruth {
    pub threshold: f64,
    pub targets: Vec<TargetTruth>,
    pub warnings: Vec<String>,
}

/// Sentences of one synthetic span as indices into [`SyntheticCorpus::lexicon`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticSpan {
    pub span_index: usize,
    pub sentences: Vec<Vec<u32>>,
}

impl SyntheticSpan {
    pub fn to_tokens(&self, lexicon: &[String]) -> TokenizedSpan {
        TokenizedSpan {
            span_index: self.span_index,
            sentences: self
                .sentences
                .iter()
                .map(|s| s.iter().map(|&i| lexicon[i as usize].clone()).collect())
                .collect(),
        }
    }
}

struct TargetIds {
    word: u32,
    pool_a: Vec<u32>,
    pool_b: Vec<u32>,
}

/// Validated generator. Spans are generated independently from per-span seeds, so any
/// span can be regenerated alone and large corpora can be streamed.
pub struct SyntheticCorpus {
    spec: SyntheticShiftSpec,
    span_count: usize,
    lexicon: Vec<String>,
    /// `topics[k]` lists the lexicon ids of topic `k` by rank.
    topics: Vec<Vec<u32>>,
    /// Cumulative Zipf weights per topic.
    topic_cdfs: Vec<Vec<f64>>,
    targets: Vec<TargetIds>,
}

const CONSONANTS: &[u8] = b"bcdfglmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// Pseudo-word for `index`, consonant-vowel syllables, `syllables` long.
fn pseudo_word(mut index: usize, syllables: u32) -> String {
    let base = CONSONANTS.len() * VOWELS.len();
    let mut s = String::with_capacity(2 * syllables as usize);
    for _ in 0..syllables {
        let syl = index % base;
        index /= base;
        s.push(CONSONANTS[syl / VOWELS.len()] as char);
        s.push(VOWELS[syl % VOWELS.len()] as char);
    }
    s
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    for c in &mut cdf {
        *c /= acc;
    }
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u = rng::unit_f64(rng);
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

impl SyntheticCorpus {
    pub fn new(spec: SyntheticShiftSpec, cfg: &TimeSpanConfig) -> Result<Self> {
        cfg.validate()?;
        let span_count = cfg.span_count();
        spec.validate(span_count)?;

        let mut lexicon: Vec<String> = Vec::new();
        let mut index_of = hashbrown::HashMap::<String, u32>::new();
        let mut intern = |w: &str, lexicon: &mut Vec<String>| -> u32 {
            *index_of.entry(w.to_string()).or_insert_with(|| {
                lexicon.push(w.to_string());
                (lexicon.len() - 1) as u32
            })
        };
        let targets: Vec<TargetIds> = spec
            .targets
            .iter()
            .map(|t| TargetIds {
                word: intern(&t.target_word, &mut lexicon),
                pool_a: t
                    .sense_a_context_pool
                    .iter()
                    .map(|w| intern(w, &mut lexicon))
                    .collect(),
                pool_b: t
                    .sense_b_context_pool
                    .iter()
                    .map(|w| intern(w, &mut lexicon))
                    .collect(),
            })
            .collect();

        let reserved: HashSet<String> = lexicon.iter().cloned().collect();
        let base = CONSONANTS.len() * VOWELS.len();
        let mut syllables = 3u32;
        while base.pow(syllables) < spec.background_vocab_size + reserved.len() {
            syllables += 1;
        }
        let mut background = Vec::with_capacity(spec.background_vocab_size);
        let mut i = 0usize;
        while background.len() < spec.background_vocab_size {
            let w = pseudo_word(i, syllables);
            i += 1;
            if reserved.contains(&w) {
                continue;
            }
            lexicon.push(w);
            background.push((lexicon.len() - 1) as u32);
        }

        let k = spec.background_topics;
        let mut topics = alloc::vec![Vec::new(); k];
        for (rank, &id) in background.iter().enumerate() {
            topics[rank % k].push(id);
        }
        let s = spec.zipf_exponent;
        let mut topic_cdfs: Vec<Vec<f64>> = topics
            .iter()
            .map(|ids| cumulative((1..=ids.len()).map(|r| 1.0 / math::powf(r as f64, s))))
            .collect();
        if spec.pools_as_topics {
            for t in &targets {
                for pool in [&t.pool_a, &t.pool_b] {
                    topic_cdfs.push(cumulative(pool.iter().map(|_| 1.0)));
                    topics.push(pool.clone());
                }
            }
        }

        Ok(SyntheticCorpus {
            spec,
            span_count,
            lexicon,
            topics,
            topic_cdfs,
            targets,
        })
    }

    pub fn spec(&self) -> &SyntheticShiftSpec {
        &self.spec
    }

    pub fn span_count(&self) -> usize {
        self.span_count
    }

    /// Every word the generator can emit; span sentences index into this.
    pub fn lexicon(&self) -> &[String] {
        &self.lexicon
    }

    pub fn ground_truth(&self) -> GroundTruth {
        let mut warnings = Vec::new();
        let last = self.span_count - 1;
        for t in &self.spec.targets {
            if t.per_span_target_occurrences[last] == 0 {
                warnings.push(format!(
                    "{}: no occurrences in the last span; under reverse chaining its vector \
                     stays at its random initialization there",
                    t.target_word
                ));
            }
        }
        GroundTruth {
            threshold: self.spec.shift_threshold,
            targets: self
                .spec
                .targets
                .iter()
                .map(|t| TargetTruth {
                    word: t.target_word.clone(),
                    shift_span: self.spec.shift_span(t),
                    per_span_mixture: t.per_span_mixture.clone(),
                    per_span_target_occurrences: t.per_span_target_occurrences.clone(),
                })
                .collect(),
            warnings,
        }
    }

    pub fn generate_span(&self, span_index: usize) -> SyntheticSpan {
        assert!(span_index < self.span_count, "span {span_index} out of range");
        let mut rng = rng::seeded(rng::derive(self.spec.seed, span_index as u64));
        let len = self.spec.sentence_length;

        // 0 marks a background sentence, i + 1 a sentence for target i.
        let mut kinds: Vec<u32> =
            alloc::vec![0; self.spec.background_sentences_per_span];
        for (i, t) in self.spec.targets.iter().enumerate() {
            let n = t.per_span_target_occurrences[span_index] as usize;
            kinds.extend(core::iter::repeat(i as u32 + 1).take(n));
        }
        rng::shuffle(&mut rng, &mut kinds);

        let sentences = kinds
            .into_iter()
            .map(|kind| {
                if kind == 0 {
                    let topic = rng::below(&mut rng, self.topics.len());
                    let (ids, cdf) = (&self.topics[topic], &self.topic_cdfs[topic]);
                    (0..len).map(|_| ids[draw(cdf, &mut rng)]).collect()
                } else {
                    let i = kind as usize - 1;
                    let ids = &self.targets[i];
                    let mixture = self.spec.targets[i].per_span_mixture[span_index];
                    let pool = if rng.gen_bool(mixture) {
                        &ids.pool_b
                    } else {
                        &ids.pool_a
                    };
                    let at = rng::below(&mut rng, len);
                    (0..len)
                        .map(|p| {
                            if p == at {
                                ids.word
                            } else {
                                pool[rng::below(&mut rng, pool.len())]
                            }
                        })
                        .collect()
                }
            })
            .collect();
        SyntheticSpan {
            span_index,
            sentences,
        }
    }
}

/// Generates every span as tokens, plus the planted ground truth.
pub fn synthesize(
    spec: SyntheticShiftSpec,
    cfg: &TimeSpanConfig,
) -> Result<(Vec<TokenizedSpan>, GroundTruth)> {
    let corpus = SyntheticCorpus::new(spec, cfg)?;
    let spans = (0..corpus.span_count())
        .map(|t| corpus.generate_span(t).to_tokens(corpus.lexicon()))
        .collect();
    Ok((spans, corpus.ground_truth()))
}

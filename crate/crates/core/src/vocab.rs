//! Corpus-wide vocabulary and the smoothed unigram table for negative sampling.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::corpus::{SpanCorpus, TokenizedSpan};
use crate::rng::{self, ChaCha8Rng};
use crate::{math, Error, Result};

pub const DEFAULT_MIN_COUNT: u64 = 5;
pub const DEFAULT_ALPHA: f64 = 0.75;

/// Dense ids ordered by descending count, ties broken by byte-wise word order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    min_count: u64,
    word_to_id: HashMap<String, u32>,
}

/// Accumulates token counts over any number of spans.
#[derive(Debug, Clone, Default)]
pub struct VocabCounter {
    counts: HashMap<String, u64>,
    total: u64,
}

impl VocabCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, token: &str) {
        self.add_n(token, 1);
    }

    pub fn add_n(&mut self, token: &str, n: u64) {
        if let Some(c) = self.counts.get_mut(token) {
            *c += n;
        } else {
            self.counts.insert(token.to_string(), n);
        }
        self.total += n;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn finish(self, min_count: u64) -> Result<Vocabulary> {
        Vocabulary::from_counts(self.counts, min_count)
    }
}

impl Vocabulary {
    /// Builds from `(word, count)` pairs; repeated words are summed before filtering.
    pub fn from_counts<I>(counts: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        if min_count == 0 {
            return Err(Error::config("min_count must be at least 1"));
        }
        let mut merged: HashMap<String, u64> = HashMap::new();
        for (w, c) in counts {
            *merged.entry(w).or_insert(0) += c;
        }
        if merged.values().all(|&c| c == 0) {
            return Err(Error::EmptyCorpus("no tokens to build a vocabulary from".into()));
        }
        let mut entries: Vec<(String, u64)> =
            merged.into_iter().filter(|&(_, c)| c >= min_count).collect();
        if entries.is_empty() {
            return Err(Error::EmptyCorpus(format!(
                "no word occurs at least {min_count} times"
            )));
        }
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self::from_sorted(entries, min_count)
    }

    /// Rebuilds a serialized vocabulary; the entries must already be in id order.
    pub fn from_ordered(entries: Vec<(String, u64)>, min_count: u64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyCorpus("vocabulary has no entries".into()));
        }
        for (i, pair) in entries.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if (b.1, &a.0) >= (a.1, &b.0) {
                return Err(Error::config(format!(
                    "entries {i} and {} are not in id order",
                    i + 1
                )));
            }
        }
        if let Some((w, c)) = entries.iter().find(|(_, c)| *c < min_count) {
            return Err(Error::config(format!("{w:?} has count {c} below {min_count}")));
        }
        Self::from_sorted(entries, min_count)
    }

    fn from_sorted(entries: Vec<(String, u64)>, min_count: u64) -> Result<Self> {
        if entries.len() > u32::MAX as usize {
            return Err(Error::config("vocabulary exceeds u32 ids"));
        }
        let (words, counts): (Vec<String>, Vec<u64>) = entries.into_iter().unzip();
        let word_to_id = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Ok(Vocabulary {
            words,
            counts,
            min_count,
            word_to_id,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.word_to_id.get(word).copied()
    }

    /// Like [`Vocabulary::id`] but an error naming the word.
    pub fn require(&self, word: &str) -> Result<u32> {
        self.id(word)
            .ok_or_else(|| Error::OutOfVocabulary(word.to_string()))
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Ids of the retained tokens; filtered tokens are deleted, not masked.
    pub fn encode_sentence<'a, I>(&self, tokens: I) -> Vec<u32>
    where
        I: IntoIterator<Item = &'a str>,
    {
        tokens.into_iter().filter_map(|t| self.id(t)).collect()
    }

    /// Encodes a span, dropping sentences left empty by filtering.
    pub fn encode_span(&self, span: &TokenizedSpan) -> SpanCorpus {
        let sentences = span
            .sentences
            .iter()
            .map(|s| self.encode_sentence(s.iter().map(String::as_str)))
            .filter(|s| !s.is_empty())
            .collect();
        SpanCorpus::new(span.span_index, sentences)
    }

    /// Maps foreign word indices (for example a synthetic lexicon) onto ids.
    pub fn id_map(&self, lexicon: &[String]) -> Vec<Option<u32>> {
        lexicon.iter().map(|w| self.id(w)).collect()
    }
}

/// Counts every token of every span, then applies `min_count`.
pub fn build_vocabulary(spans: &[TokenizedSpan], min_count: u64) -> Result<Vocabulary> {
    let mut counter = VocabCounter::new();
    for t in spans.iter().flat_map(TokenizedSpan::tokens) {
        counter.add(t);
    }
    if counter.total() == 0 {
        return Err(Error::EmptyCorpus("no tokens in any span".into()));
    }
    counter.finish(min_count)
}

/// Cumulative distribution over ids proportional to `count^alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeSamplingTable {
    cdf: Vec<f64>,
    alpha: f64,
}

impl NegativeSamplingTable {
    pub fn new(vocab: &Vocabulary, alpha: f64) -> Result<Self> {
        Self::from_counts(vocab.counts(), alpha)
    }

    pub fn from_counts(counts: &[u64], alpha: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyCorpus("no counts for the sampling table".into()));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::config(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        if counts.contains(&0) {
            return Err(Error::config("sampling table counts must be positive"));
        }
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| math::powf(c as f64, alpha))
            .collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        *cdf.last_mut().expect("non-empty") = 1.0;
        Ok(NegativeSamplingTable { cdf, alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn probability(&self, id: u32) -> f64 {
        let i = id as usize;
        if i == 0 {
            self.cdf[0]
        } else {
            self.cdf[i] - self.cdf[i - 1]
        }
    }

    #[inline]
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        let u = rng::unit_f64(rng);
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1) as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn span(sentences: &[&[&str]]) -> TokenizedSpan {
        TokenizedSpan {
            span_index: 0,
            sentences: sentences
                .iter()
                .map(|s| s.iter().map(|w| w.to_string()).collect())
                .collect(),
        }
    }

    #[test]
    fn min_count_excludes_rare_words() {
        let s = span(&[&["a", "a", "a", "a", "a", "b", "b", "b", "b"]]);
        let v = build_vocabulary(core::slice::from_ref(&s), 5).unwrap();
        assert_eq!(v.words(), ["a"]);
        assert!(v.id("b").is_none());
        let all = build_vocabulary(&[s], 1).unwrap();
        assert_eq!(all.words(), ["a", "b"]);
    }

    #[test]
    fn ties_break_lexicographically() {
        let v = Vocabulary::from_counts(vec![("b".into(), 10), ("a".into(), 10)], 1).unwrap();
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.id("b"), Some(1));
    }

    #[test]
    fn counts_aggregate_across_spans() {
        let s1 = span(&[&["x", "x", "y"]]);
        let s2 = span(&[&["x", "y", "y", "y", "y"]]);
        let v = build_vocabulary(&[s1, s2], 3).unwrap();
        assert_eq!(v.words(), ["y", "x"]);
        assert_eq!(v.counts(), [5, 3]);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(
            build_vocabulary(&[span(&[])], 1),
            Err(Error::EmptyCorpus(_))
        ));
        assert!(build_vocabulary(&[span(&[&["a"]])], 0).is_err());
        assert!(matches!(
            build_vocabulary(&[span(&[&["a"]])], 2),
            Err(Error::EmptyCorpus(_))
        ));
    }

    #[test]
    fn encode_deletes_filtered_tokens() {
        let v = Vocabulary::from_counts(vec![("a".into(), 5), ("b".into(), 6)], 5).unwrap();
        let s = span(&[&["a", "zz", "b"], &["zz"]]);
        let c = v.encode_span(&s);
        assert_eq!(c.sentences, vec![vec![1, 0]]);
        assert_eq!(c.token_count, 2);
    }

    #[test]
    fn from_ordered_round_trip_and_checks() {
        let v = Vocabulary::from_counts(
            vec![("c".into(), 2), ("a".into(), 7), ("b".into(), 7)],
            1,
        )
        .unwrap();
        let entries: Vec<_> = v
            .words()
            .iter()
            .cloned()
            .zip(v.counts().iter().copied())
            .collect();
        assert_eq!(Vocabulary::from_ordered(entries.clone(), 1).unwrap(), v);
        let mut swapped = entries.clone();
        swapped.swap(0, 1);
        assert!(Vocabulary::from_ordered(swapped, 1).is_err());
        assert!(Vocabulary::from_ordered(entries, 3).is_err());
    }

    #[test]
    fn smoothed_probabilities() {
        let t = NegativeSamplingTable::from_counts(&[4, 1], 0.75).unwrap();
        let expected = libm::pow(4.0, 0.75) / (libm::pow(4.0, 0.75) + 1.0);
        assert!((t.probability(0) - expected).abs() < 1e-12);
        assert!((t.probability(0) - 0.7388).abs() < 1e-4);
        let even = NegativeSamplingTable::from_counts(&[1, 1], 0.75).unwrap();
        assert!((even.probability(0) - 0.5).abs() < 1e-15);
        let flat = NegativeSamplingTable::from_counts(&[100, 7, 1], 0.0).unwrap();
        for id in 0..3 {
            assert!((flat.probability(id) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn table_rejects_bad_input() {
        assert!(NegativeSamplingTable::from_counts(&[], 0.75).is_err());
        assert!(NegativeSamplingTable::from_counts(&[1], -1.0).is_err());
        assert!(NegativeSamplingTable::from_counts(&[1, 0], 0.75).is_err());
    }

    #[test]
    fn empirical_frequencies_two_words() {
        let t = NegativeSamplingTable::from_counts(&[4, 1], 0.75).unwrap();
        let mut rng = rng::seeded(9);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| t.sample(&mut rng) == 0).count();
        let p = hits as f64 / n as f64;
        assert!((p - 0.7388).abs() < 0.003, "p = {p}");
    }
}

//! Documents, tokenization, year-span bucketing and synthetic shift corpora.

mod bucket;
mod synth;
mod tokenize;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

pub use bucket::{bucket, Bucketed, TokenizedSpan};
pub use synth::{
    synthesize, GroundTruth, PlantedTarget, SyntheticCorpus, SyntheticShiftSpec, SyntheticSpan,
    TargetTruth, DEFAULT_BACKGROUND_TOPICS, DEFAULT_SHIFT_THRESHOLD,
};
pub use tokenize::{tokenize, Tokens};

/// Fixed-width year buckets covering `[start_year, end_year]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeSpanConfig {
    pub start_year: i32,
    pub end_year: i32,
    pub span_width_years: u32,
    /// Accept a final span narrower than `span_width_years`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub allow_short_last_span: bool,
}

impl TimeSpanConfig {
    pub fn new(start_year: i32, end_year: i32, span_width_years: u32) -> Result<Self> {
        let cfg = TimeSpanConfig {
            start_year,
            end_year,
            span_width_years,
            allow_short_last_span: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.span_width_years == 0 {
            return Err(Error::config("span width must be positive"));
        }
        if self.end_year < self.start_year {
            return Err(Error::config(format!(
                "end year {} precedes start year {}",
                self.end_year, self.start_year
            )));
        }
        let years = self.year_count();
        if !self.allow_short_last_span && years % u64::from(self.span_width_years) != 0 {
            return Err(Error::config(format!(
                "{years} years do not divide into spans of {} years",
                self.span_width_years
            )));
        }
        if self.span_count() < 2 {
            return Err(Error::config(format!(
                "at least two spans are needed, got {}",
                self.span_count()
            )));
        }
        Ok(())
    }

    fn year_count(&self) -> u64 {
        (i64::from(self.end_year) - i64::from(self.start_year) + 1) as u64
    }

    pub fn span_count(&self) -> usize {
        self.year_count().div_ceil(u64::from(self.span_width_years)) as usize
    }

    /// Span holding `year`, or `None` outside the configured range.
    pub fn span_of(&self, year: i32) -> Option<usize> {
        if year < self.start_year || year > self.end_year {
            return None;
        }
        let offset = (i64::from(year) - i64::from(self.start_year)) as u64;
        Some((offset / u64::from(self.span_width_years)) as usize)
    }

    /// First and last year of span `index`, inclusive.
    pub fn span_years(&self, index: usize) -> (i32, i32) {
        let width = self.span_width_years as i32;
        let first = self.start_year + index as i32 * width;
        (first, (first + width - 1).min(self.end_year))
    }

    /// `"1984-1985"` style label.
    pub fn span_label(&self, index: usize) -> String {
        let (a, b) = self.span_years(index);
        format!("{a}-{b}")
    }
}

/// One dated text. Lines are sentence boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub year: i32,
    pub text: String,
}

impl Document {
    pub fn new(year: i32, text: impl Into<String>) -> Self {
        Document {
            year,
            text: text.into(),
        }
    }

    /// Tokenized non-empty lines.
    pub fn sentences(&self) -> impl Iterator<Item = Vec<String>> + '_ {
        self.text
            .lines()
            .map(tokenize)
            .filter(|s| !s.is_empty())
    }
}

/// Token ids of one span, ready for training.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpanCorpus {
    pub span_index: usize,
    pub sentences: Vec<Vec<u32>>,
    pub token_count: u64,
}

impl SpanCorpus {
    pub fn new(span_index: usize, sentences: Vec<Vec<u32>>) -> Self {
        let token_count = sentences.iter().map(|s| s.len() as u64).sum();
        SpanCorpus {
            span_index,
            sentences,
            token_count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.token_count == 0
    }

    pub fn tokens(&self) -> impl Iterator<Item = u32> + '_ {
        self.sentences.iter().flatten().copied()
    }

    /// Occurrences of every id below `vocab_size`.
    pub fn occurrences(&self, vocab_size: usize) -> Vec<u64> {
        let mut counts = alloc::vec![0u64; vocab_size];
        for id in self.tokens() {
            counts[id as usize] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_two_year_spans() {
        let cfg = TimeSpanConfig::new(1984, 2015, 2).unwrap();
        assert_eq!(cfg.span_count(), 16);
        assert_eq!(cfg.span_of(1984), Some(0));
        assert_eq!(cfg.span_of(2015), Some(15));
        assert_eq!(cfg.span_of(1999), Some(7));
        assert_eq!(cfg.span_of(1983), None);
        assert_eq!(cfg.span_of(2016), None);
        assert_eq!(cfg.span_label(0), "1984-1985");
        assert_eq!(cfg.span_label(15), "2014-2015");
    }

    #[test]
    fn rejects_single_span_and_ragged_end() {
        assert!(TimeSpanConfig::new(1984, 1985, 2).is_err());
        assert!(TimeSpanConfig::new(1984, 1986, 2).is_err());
        assert!(TimeSpanConfig::new(1990, 1984, 2).is_err());
        assert!(TimeSpanConfig::new(1984, 1990, 0).is_err());
        let short = TimeSpanConfig {
            allow_short_last_span: true,
            ..TimeSpanConfig {
                start_year: 1984,
                end_year: 1986,
                span_width_years: 2,
                allow_short_last_span: false,
            }
        };
        short.validate().unwrap();
        assert_eq!(short.span_count(), 2);
        assert_eq!(short.span_years(1), (1986, 1986));
    }

    #[test]
    fn span_corpus_counts_tokens() {
        let c = SpanCorpus::new(3, alloc::vec![alloc::vec![0, 1, 1], alloc::vec![2]]);
        assert_eq!(c.token_count, 4);
        assert_eq!(c.occurrences(4), [1, 2, 1, 0]);
    }
}

use alloc::string::String;
use alloc::vec::Vec;

use super::{Document, TimeSpanConfig};
use crate::Result;

/// Tokenized sentences of one span, before vocabulary filtering.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenizedSpan {
    pub span_index: usize,
    pub sentences: Vec<Vec<String>>,
}

impl TokenizedSpan {
    pub fn token_count(&self) -> u64 {
        self.sentences.iter().map(|s| s.len() as u64).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flatten().map(String::as_str)
    }
}

/// Output of [`bucket`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bucketed {
    /// Exactly `span_count` entries, chronological.
    pub spans: Vec<TokenizedSpan>,
    pub documents: usize,
    /// Documents dated outside the configured years.
    pub out_of_range: usize,
    /// Documents without a single token.
    pub empty: usize,
}

/// Assigns each document to span `(year - start_year) / width` and tokenizes it line by line.
/// Document order is preserved inside a span.
pub fn bucket<I>(documents: I, cfg: &TimeSpanConfig) -> Result<Bucketed>
where
    I: IntoIterator<Item = Document>,
{
    cfg.validate()?;
    let mut out = Bucketed {
        spans: (0..cfg.span_count())
            .map(|span_index| TokenizedSpan {
                span_index,
                sentences: Vec::new(),
            })
            .collect(),
        ..Bucketed::default()
    };
    for doc in documents {
        out.documents += 1;
        let Some(span) = cfg.span_of(doc.year) else {
            out.out_of_range += 1;
            continue;
        };
        let before = out.spans[span].sentences.len();
        out.spans[span].sentences.extend(doc.sentences());
        if out.spans[span].sentences.len() == before {
            out.empty += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cfg() -> TimeSpanConfig {
        TimeSpanConfig::new(1984, 2015, 2).unwrap()
    }

    #[test]
    fn sixteen_span_layout_buckets_years() {
        let docs = vec![
            Document::new(1984, "primo"),
            Document::new(2015, "ultimo"),
            Document::new(1999, "mezzo"),
        ];
        let b = bucket(docs, &cfg()).unwrap();
        assert_eq!(b.spans.len(), 16);
        assert_eq!(b.spans[0].sentences, vec![vec!["primo"]]);
        assert_eq!(b.spans[15].sentences, vec![vec!["ultimo"]]);
        assert_eq!(b.spans[7].sentences, vec![vec!["mezzo"]]);
    }

    #[test]
    fn out_of_range_and_empty_are_counted() {
        let docs = vec![
            Document::new(1970, "fuori"),
            Document::new(1990, "123 ..."),
            Document::new(1990, "dentro\n\nancora"),
        ];
        let b = bucket(docs, &cfg()).unwrap();
        assert_eq!(b.documents, 3);
        assert_eq!(b.out_of_range, 1);
        assert_eq!(b.empty, 1);
        assert_eq!(b.spans[3].sentences, vec![vec!["dentro"], vec!["ancora"]]);
    }

    #[test]
    fn single_span_config_rejected() {
        let bad = TimeSpanConfig {
            start_year: 2000,
            end_year: 2001,
            span_width_years: 2,
            allow_short_last_span: false,
        };
        assert!(bucket(Vec::new(), &bad).is_err());
    }
}

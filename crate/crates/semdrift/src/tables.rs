//! Vocabulary and occurrence tables as tab-separated text.
//!
//! `vocab.tsv` starts with `#min_count=<n>\talpha=<a>`, then one `word\tcount` line per id.
//! `occurrences.tsv` has a `word` header followed by one column per span label, and one
//! row per vocabulary id in id order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use semdrift_core::shift::OccurrenceTable;
use semdrift_core::vocab::Vocabulary;
use sha2::{Digest, Sha256};

use crate::error::{Error, IoContext, Result};

pub fn vocab_to_string(vocab: &Vocabulary, alpha: f64) -> String {
    let mut out = format!("#min_count={}\talpha={alpha}\n", vocab.min_count());
    for (w, c) in vocab.words().iter().zip(vocab.counts()) {
        let _ = writeln!(out, "{w}\t{c}");
    }
    out
}

pub fn write_vocab(path: &Path, vocab: &Vocabulary, alpha: f64) -> Result<()> {
    crate::write_atomic(path, vocab_to_string(vocab, alpha).as_bytes())
}

/// Returns the vocabulary and the sampling exponent stored with it.
pub fn read_vocab(path: &Path) -> Result<(Vocabulary, f64)> {
    let text = fs::read_to_string(path).at(path)?;
    parse_vocab(&text).map_err(|m| Error::format(path, m))
}

fn parse_vocab(text: &str) -> std::result::Result<(Vocabulary, f64), String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let header = header.strip_prefix('#').ok_or("missing header line")?;
    let (mut min_count, mut alpha) = (None, None);
    for field in header.split('\t') {
        match field.split_once('=') {
            Some(("min_count", v)) => min_count = v.parse::<u64>().ok(),
            Some(("alpha", v)) => alpha = v.parse::<f64>().ok(),
            _ => return Err(format!("unknown header field {field:?}")),
        }
    }
    let min_count = min_count.ok_or("header lacks min_count")?;
    let alpha = alpha.ok_or("header lacks alpha")?;
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        let (w, c) = line
            .split_once('\t')
            .ok_or_else(|| format!("line {}: expected word<TAB>count", i + 2))?;
        let c = c
            .parse::<u64>()
            .map_err(|e| format!("line {}: {e}", i + 2))?;
        entries.push((w.to_string(), c));
    }
    let vocab = Vocabulary::from_ordered(entries, min_count).map_err(|e| e.to_string())?;
    Ok((vocab, alpha))
}

/// Hex SHA-256 of the serialized vocabulary; identifies it in manifests.
pub fn vocab_digest(vocab: &Vocabulary, alpha: f64) -> String {
    hex::encode(Sha256::digest(vocab_to_string(vocab, alpha).as_bytes()))
}

pub fn write_occurrences(
    path: &Path,
    vocab: &Vocabulary,
    labels: &[String],
    table: &OccurrenceTable,
) -> Result<()> {
    let mut out = String::from("word");
    for l in labels {
        out.push('\t');
        out.push_str(l);
    }
    out.push('\n');
    for (id, w) in vocab.words().iter().enumerate() {
        out.push_str(w);
        for span in 0..table.span_count() {
            let _ = write!(out, "\t{}", table.count(span, id as u32));
        }
        out.push('\n');
    }
    crate::write_atomic(path, out.as_bytes())
}

pub fn read_occurrences(path: &Path, vocab: &Vocabulary, spans: usize) -> Result<OccurrenceTable> {
    let text = fs::read_to_string(path).at(path)?;
    let bad = |m: String| Error::format(path, m);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let columns = header.split('\t').count();
    if columns != spans + 1 {
        return Err(bad(format!("{} span columns, expected {spans}", columns - 1)));
    }
    let mut rows = vec![vec![0u64; vocab.len()]; spans];
    let mut seen = 0usize;
    for (id, line) in lines.enumerate() {
        let mut fields = line.split('\t');
        let word = fields.next().unwrap_or_default();
        if id >= vocab.len() || vocab.word(id as u32) != word {
            return Err(bad(format!("line {}: {word:?} out of vocabulary order", id + 2)));
        }
        for (span, f) in fields.enumerate() {
            if span >= spans {
                return Err(bad(format!("line {}: too many columns", id + 2)));
            }
            rows[span][id] = f
                .parse()
                .map_err(|e| bad(format!("line {}: {e}", id + 2)))?;
        }
        seen += 1;
    }
    if seen != vocab.len() {
        return Err(bad(format!("{seen} rows for {} words", vocab.len())));
    }
    Ok(OccurrenceTable::from_rows(rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocab_round_trip() {
        let v = Vocabulary::from_counts([("b".to_string(), 7), ("a".to_string(), 7), ("c".to_string(), 9)], 1)
            .unwrap();
        let text = vocab_to_string(&v, 0.75);
        assert_eq!(text, "#min_count=1\talpha=0.75\nc\t9\na\t7\nb\t7\n");
        let (back, alpha) = parse_vocab(&text).unwrap();
        assert_eq!(back, v);
        assert_eq!(alpha, 0.75);
        assert!(parse_vocab("#min_count=1\talpha=0.75\na\t1\nb\t2\n").is_err());
        assert!(parse_vocab("a\t1\n").is_err());
    }
}

//! Corpus input and tokenized span files.
//!
//! Input is either a directory of UTF-8 files named `YYYY*.txt`, one document each, or a
//! file of JSON lines with an integer `year` and a string `text`. Span files hold one
//! sentence per line, tokens separated by single spaces.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use semdrift_core::corpus::{Document, SpanCorpus};
use semdrift_core::vocab::Vocabulary;
use serde::Deserialize;

use crate::error::{Error, IoContext, Result};

#[derive(Deserialize)]
struct Record {
    year: i32,
    text: String,
}

fn year_of(name: &str) -> Option<i32> {
    if !name.ends_with(".txt") || name.len() < 8 {
        return None;
    }
    let digits = name.get(..4)?;
    digits
        .bytes()
        .all(|b| b.is_ascii_digit())
        .then(|| digits.parse().ok())?
}

/// `YYYY*.txt` files of a directory in name order; other files are ignored.
pub fn corpus_files(dir: &Path) -> Result<Vec<(i32, PathBuf)>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).at(dir)? {
        let entry = entry.at(dir)?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if let Some(year) = year_of(name) {
            if entry.file_type().at(entry.path())?.is_file() {
                files.push((year, entry.path()));
            }
        }
    }
    files.sort_by(|a, b| a.1.cmp(&b.1));
    Ok(files)
}

/// Streams every document of `path` into `f` and returns how many there were.
pub fn for_each_document(path: &Path, mut f: impl FnMut(Document) -> Result<()>) -> Result<usize> {
    let meta = fs::metadata(path).at(path)?;
    let mut n = 0;
    if meta.is_dir() {
        for (year, file) in corpus_files(path)? {
            let text = fs::read_to_string(&file).at(&file)?;
            f(Document::new(year, text))?;
            n += 1;
        }
    } else {
        let reader = BufReader::new(File::open(path).at(path)?);
        for (i, line) in reader.lines().enumerate() {
            let line = line.at(path)?;
            if line.trim().is_empty() {
                continue;
            }
            let r: Record = serde_json::from_str(&line)
                .map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))?;
            f(Document::new(r.year, r.text))?;
            n += 1;
        }
    }
    Ok(n)
}

pub fn span_file_name(index: usize, label: &str) -> String {
    format!("span_{index:02}_{label}.txt")
}

/// Buffered writer of one span file.
pub struct SpanWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl SpanWriter {
    pub fn create(path: PathBuf) -> Result<Self> {
        let file = File::create(&path).at(&path)?;
        Ok(SpanWriter {
            out: BufWriter::with_capacity(1 << 16, file),
            path,
        })
    }

    pub fn sentence<S: AsRef<str>>(&mut self, tokens: &[S]) -> Result<()> {
        for (i, t) in tokens.iter().enumerate() {
            if i > 0 {
                self.out.write_all(b" ").at(&self.path)?;
            }
            self.out.write_all(t.as_ref().as_bytes()).at(&self.path)?;
        }
        self.out.write_all(b"\n").at(&self.path)
    }

    pub fn finish(self) -> Result<()> {
        let path = self.path;
        self.out
            .into_inner()
            .map_err(|e| Error::io(&path, e.into_error()))?
            .sync_all()
            .at(&path)
    }
}

/// Calls `f` with the tokens of every sentence of a span file.
pub fn for_each_sentence(path: &Path, mut f: impl FnMut(&[&str])) -> Result<()> {
    let mut reader = BufReader::with_capacity(1 << 16, File::open(path).at(path)?);
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line).at(path)? == 0 {
            return Ok(());
        }
        let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
        f(&tokens);
    }
}

/// Loads a span file as ids; words outside the vocabulary are dropped.
pub fn read_span(path: &Path, vocab: &Vocabulary, span_index: usize) -> Result<SpanCorpus> {
    let mut sentences = Vec::new();
    for_each_sentence(path, |tokens| {
        let ids = vocab.encode_sentence(tokens.iter().copied());
        if !ids.is_empty() {
            sentences.push(ids);
        }
    })?;
    Ok(SpanCorpus::new(span_index, sentences))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_names_give_years() {
        assert_eq!(year_of("1984.txt"), Some(1984));
        assert_eq!(year_of("1984-03-01_articles.txt"), Some(1984));
        assert_eq!(year_of("198.txt"), None);
        assert_eq!(year_of("notes.txt"), None);
        assert_eq!(year_of("1984.json"), None);
    }

    #[test]
    fn reads_directories_and_records() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("2001b.txt"), "Second doc").unwrap();
        fs::write(dir.path().join("2001a.txt"), "First doc").unwrap();
        fs::write(dir.path().join("README.md"), "ignored").unwrap();
        let mut seen = Vec::new();
        let n = for_each_document(dir.path(), |d| {
            seen.push((d.year, d.text));
            Ok(())
        })
        .unwrap();
        assert_eq!(n, 2);
        assert_eq!(seen[0], (2001, "First doc".to_string()));

        let jsonl = dir.path().join("c.jsonl");
        fs::write(&jsonl, "{\"year\": 1990, \"text\": \"a b\"}\n\n{\"year\": 1991, \"text\": \"c\"}\n").unwrap();
        let mut years = Vec::new();
        for_each_document(&jsonl, |d| {
            years.push(d.year);
            Ok(())
        })
        .unwrap();
        assert_eq!(years, vec![1990, 1991]);

        fs::write(&jsonl, "{\"year\": \"x\"}\n").unwrap();
        let err = for_each_document(&jsonl, |_| Ok(())).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn span_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(span_file_name(3, "2000-2001"));
        assert!(path.ends_with("span_03_2000-2001.txt"));
        let mut w = SpanWriter::create(path.clone()).unwrap();
        w.sentence(&["a", "b", "rare"]).unwrap();
        w.sentence(&["rare"]).unwrap();
        w.sentence(&["b"]).unwrap();
        w.finish().unwrap();
        let vocab = Vocabulary::from_counts([("a".to_string(), 2), ("b".to_string(), 3)], 1).unwrap();
        let s = read_span(&path, &vocab, 3).unwrap();
        assert_eq!(s.sentences, vec![vec![1, 0], vec![0]]);
        assert_eq!(s.span_index, 3);
    }
}

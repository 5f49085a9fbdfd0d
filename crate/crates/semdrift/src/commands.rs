//! The pipeline stages behind the command line, usable as a library.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use semdrift_core::chrono::{chain_train_with, ChainDirection, ChainOptions, ChainStore};
use semdrift_core::corpus::{SpanCorpus, TimeSpanConfig};
use semdrift_core::sgns::{EmbeddingSpace, SequentialTrainer, SpanTrainer, TrainingConfig};
use semdrift_core::shift::{
    band_over, baseline_sample, detect_drops, self_similarity, BaselineBand, DetectionParams,
    OccurrenceTable, ShiftReport, DEFAULT_BASELINE_SAMPLE,
};
use semdrift_core::vocab::{NegativeSamplingTable, VocabCounter, Vocabulary};

use crate::corpus_io::{for_each_document, for_each_sentence, read_span, span_file_name, SpanWriter};
use crate::error::{Error, IoContext, Result};
use crate::manifest::{
    self, IngestManifest, IngestSpan, ModelManifest, ModelSpan, VocabInfo, INGEST_FILE,
    MODEL_FILE, OCCURRENCES_FILE, SPANS_DIR, VOCAB_FILE,
};
use crate::parallel::HogwildTrainer;
use crate::report::{self, ReportContext, WordError};
use crate::space_file::{self, RowSubset};
use crate::tables;

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub time: TimeSpanConfig,
    pub min_count: u64,
    pub alpha: f64,
    pub allow_empty_spans: bool,
}

#[derive(Default)]
struct SpanStats {
    documents: usize,
    sentences: u64,
    tokens: u64,
}

/// Tokenizes the corpus into per-span files and builds the shared vocabulary.
/// Documents are streamed; only word counts stay in memory.
pub fn ingest(o: &IngestOptions) -> Result<IngestManifest> {
    o.time.validate()?;
    if !(o.alpha.is_finite() && o.alpha > 0.0) {
        return Err(Error::Usage("alpha must be positive".into()));
    }
    let spans_dir = o.out.join(SPANS_DIR);
    fs::create_dir_all(&spans_dir).at(&spans_dir)?;
    let n = o.time.span_count();
    let labels: Vec<String> = (0..n).map(|i| o.time.span_label(i)).collect();
    let files: Vec<String> = labels.iter().enumerate().map(|(i, l)| span_file_name(i, l)).collect();
    let mut writers = files
        .iter()
        .map(|f| SpanWriter::create(spans_dir.join(f)))
        .collect::<Result<Vec<_>>>()?;
    let mut stats: Vec<SpanStats> = (0..n).map(|_| SpanStats::default()).collect();
    let mut counter = VocabCounter::new();
    let (mut out_of_range, mut empty) = (0usize, 0usize);

    let documents = for_each_document(&o.corpus, |doc| {
        let Some(span) = o.time.span_of(doc.year) else {
            out_of_range += 1;
            return Ok(());
        };
        let st = &mut stats[span];
        let before = st.tokens;
        for sentence in doc.sentences() {
            for t in &sentence {
                counter.add(t);
            }
            st.sentences += 1;
            st.tokens += sentence.len() as u64;
            writers[span].sentence(&sentence)?;
        }
        if st.tokens == before {
            empty += 1;
        } else {
            st.documents += 1;
        }
        Ok(())
    })?;
    for w in writers {
        w.finish()?;
    }
    if documents == 0 {
        return Err(Error::Data(format!("no documents in {}", o.corpus.display())));
    }
    if out_of_range > 0 {
        log::warn!(
            "{out_of_range} of {documents} documents fall outside {}-{} and were excluded",
            o.time.start_year,
            o.time.end_year
        );
    }
    if empty > 0 {
        log::warn!("{empty} documents contain no tokens");
    }
    if documents == out_of_range {
        return Err(Error::Data(format!(
            "no documents between {} and {}",
            o.time.start_year, o.time.end_year
        )));
    }
    let missing: Vec<&str> = (0..n)
        .filter(|&i| stats[i].tokens == 0)
        .map(|i| labels[i].as_str())
        .collect();
    if !missing.is_empty() {
        if !o.allow_empty_spans {
            return Err(Error::Data(format!(
                "no tokens in span(s) {}; pass --allow-empty-spans to keep them",
                missing.join(", ")
            )));
        }
        log::warn!("empty span(s) {} keep their initialization", missing.join(", "));
    }

    let vocab = counter.finish(o.min_count)?;
    log::info!("vocabulary: {} words with count >= {}", vocab.len(), o.min_count);
    let mut rows = Vec::with_capacity(n);
    let mut retained = Vec::with_capacity(n);
    for f in &files {
        let mut counts = vec![0u64; vocab.len()];
        let mut kept = 0u64;
        for_each_sentence(&spans_dir.join(f), |tokens| {
            for t in tokens {
                if let Some(id) = vocab.id(t) {
                    counts[id as usize] += 1;
                    kept += 1;
                }
            }
        })?;
        rows.push(counts);
        retained.push(kept);
    }
    let occurrences = OccurrenceTable::from_rows(rows)?;
    tables::write_vocab(&o.out.join(VOCAB_FILE), &vocab, o.alpha)?;
    tables::write_occurrences(&o.out.join(OCCURRENCES_FILE), &vocab, &labels, &occurrences)?;

    let m = IngestManifest {
        format: manifest::INGEST_FORMAT.into(),
        time: o.time,
        documents,
        out_of_range,
        empty_documents: empty,
        spans: (0..n)
            .map(|i| IngestSpan {
                index: i,
                label: labels[i].clone(),
                file: format!("{SPANS_DIR}/{}", files[i]),
                documents: stats[i].documents,
                sentences: stats[i].sentences,
                tokens: stats[i].tokens,
                retained_tokens: retained[i],
            })
            .collect(),
        vocabulary: VocabInfo {
            size: vocab.len(),
            min_count: o.min_count,
            alpha: o.alpha,
            sha256: tables::vocab_digest(&vocab, o.alpha),
        },
    };
    manifest::write_json(&o.out.join(INGEST_FILE), &m)?;
    for s in &m.spans {
        log::info!(
            "span {} ({}): {} documents, {} tokens, {} in vocabulary",
            s.index,
            s.label,
            s.documents,
            s.tokens,
            s.retained_tokens
        );
    }
    Ok(m)
}

fn load_vocab(dir: &Path, info: &VocabInfo) -> Result<Vocabulary> {
    let path = dir.join(VOCAB_FILE);
    let (vocab, alpha) = tables::read_vocab(&path)?;
    if tables::vocab_digest(&vocab, alpha) != info.sha256 {
        return Err(Error::format(&path, "does not match the digest in the manifest"));
    }
    Ok(vocab)
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub data: PathBuf,
    pub model: PathBuf,
    pub training: TrainingConfig,
    pub direction: ChainDirection,
    pub span_epochs: Option<Vec<u32>>,
}

const THREADS_WARNING: &str = "\
***********************************************************************
* More than one training thread: workers update shared rows without  *
* locks, so results differ from run to run. Use --threads 1 for       *
* reproducible output.                                                *
***********************************************************************";

struct FileStore<'a> {
    data: &'a Path,
    model: &'a Path,
    vocab: &'a Vocabulary,
    ingest: &'a IngestManifest,
    manifest: ModelManifest,
}

impl FileStore<'_> {
    fn space_path(&self, span: usize) -> PathBuf {
        self.model.join(&self.manifest.spans[span].file)
    }
}

impl ChainStore for FileStore<'_> {
    type Error = Error;

    fn load_span(&mut self, span: usize) -> Result<Cow<'_, SpanCorpus>> {
        let s = &self.ingest.spans[span];
        log::info!("span {span} ({}): training on {} tokens", s.label, s.retained_tokens);
        Ok(Cow::Owned(read_span(&self.data.join(&s.file), self.vocab, span)?))
    }

    fn completed(&mut self, span: usize) -> Result<Option<EmbeddingSpace>> {
        if !self.manifest.completed.contains(&span) {
            return Ok(None);
        }
        log::info!("span {span} ({}): reusing finished space", self.manifest.spans[span].label);
        space_file::read_space(&self.space_path(span)).map(Some)
    }

    fn store(&mut self, space: &EmbeddingSpace) -> Result<()> {
        let span = space.span_index;
        space_file::write_space(&self.space_path(span), space)?;
        self.manifest.completed.push(span);
        manifest::write_json(&self.model.join(MODEL_FILE), &self.manifest)?;
        log::info!(
            "span {span} ({}): done, {} positions trained",
            self.manifest.spans[span].label,
            space.trained_token_count
        );
        Ok(())
    }
}

/// Trains every span in chain order, writing each space as soon as it is done. A model
/// directory holding a partial run of the same configuration is resumed.
pub fn train(o: &TrainOptions) -> Result<ModelManifest> {
    o.training.validate()?;
    let ingest = manifest::read_ingest(&o.data)?;
    let vocab = load_vocab(&o.data, &ingest.vocabulary)?;
    let n = ingest.spans.len();
    if let Some(e) = &o.span_epochs {
        if e.len() != n {
            return Err(Error::Usage(format!("{} per-span epoch counts for {n} spans", e.len())));
        }
    }
    let all_zero = match &o.span_epochs {
        Some(e) => e.iter().all(|&x| x == 0),
        None => o.training.epochs == 0,
    };
    if all_zero {
        log::warn!("null training: zero epochs, every span keeps the random initialization");
    }
    if o.training.threads > 1 {
        log::warn!("\n{THREADS_WARNING}");
    }

    let fresh = ModelManifest {
        format: manifest::MODEL_FORMAT.into(),
        training: o.training.clone(),
        direction: o.direction,
        span_epochs: o.span_epochs.clone(),
        time: ingest.time,
        vocabulary: ingest.vocabulary.clone(),
        ingest_sha256: manifest::file_sha256(&o.data.join(INGEST_FILE))?,
        spans: ingest
            .spans
            .iter()
            .map(|s| ModelSpan {
                index: s.index,
                label: s.label.clone(),
                file: manifest::space_file_name(s.index, &s.label),
                tokens: s.retained_tokens,
            })
            .collect(),
        training_order: o.direction.order(n),
        completed: Vec::new(),
    };
    fs::create_dir_all(&o.model).at(&o.model)?;
    let existing = o.model.join(MODEL_FILE);
    let manifest = if existing.exists() {
        let old = manifest::read_model(&o.model)?;
        if !old.same_run(&fresh) {
            return Err(Error::Usage(format!(
                "{} holds a model with a different configuration; choose another --model",
                o.model.display()
            )));
        }
        if old.is_complete() {
            log::info!("model is already complete");
            return Ok(old);
        }
        if !old.completed.is_empty() {
            log::info!("resuming after {} finished span(s)", old.completed.len());
        }
        old
    } else {
        fresh
    };
    for f in [VOCAB_FILE, OCCURRENCES_FILE] {
        let (from, to) = (o.data.join(f), o.model.join(f));
        fs::copy(&from, &to).at(&to)?;
    }
    manifest::write_json(&existing, &manifest)?;

    let order: Vec<String> = manifest.training_order.iter().map(|i| i.to_string()).collect();
    log::info!(
        "training {} spans ({}) in order {}",
        n,
        o.direction.as_str(),
        order.join(", ")
    );
    let table = NegativeSamplingTable::new(&vocab, ingest.vocabulary.alpha)?;
    let mut store = FileStore {
        data: &o.data,
        model: &o.model,
        vocab: &vocab,
        ingest: &ingest,
        manifest,
    };
    let options = ChainOptions {
        direction: o.direction,
        span_epochs: o.span_epochs.clone(),
    };
    let trainer: &dyn SpanTrainer = if o.training.threads > 1 {
        &HogwildTrainer
    } else {
        &SequentialTrainer
    };
    chain_train_with(&mut store, n, &vocab, &table, &o.training, &options, trainer)?;
    if let Some(kib) = crate::peak_rss_kib() {
        log::info!("peak resident memory {:.1} MiB", kib as f64 / 1024.0);
    }
    Ok(store.manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub model: PathBuf,
    pub words: Vec<String>,
    /// `None` samples `min(5000, candidates)` words.
    pub baseline_sample: Option<usize>,
    /// Restricts the baseline to these words.
    pub baseline_words: Option<Vec<String>>,
    pub seed: u64,
    pub params: DetectionParams,
    pub formats: Vec<OutputFormat>,
    pub out: PathBuf,
    /// First-attestation year per word, drawn on charts.
    pub dictionary: BTreeMap<String, i32>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub labels: Vec<String>,
    pub band: BaselineBand,
    pub reports: Vec<ShiftReport>,
    pub errors: Vec<WordError>,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
}

/// Self-similarity, baseline band and drop detection for the requested words. Only the
/// input rows of those words and of the baseline sample are read from disk.
pub fn analyze(o: &AnalyzeOptions) -> Result<Analysis> {
    o.params.validate()?;
    let m = manifest::read_model(&o.model)?;
    if !m.is_complete() {
        let missing: Vec<String> = m
            .training_order
            .iter()
            .filter(|i| !m.completed.contains(i))
            .map(|i| m.spans[*i].label.clone())
            .collect();
        return Err(Error::Data(format!(
            "model is incomplete, span(s) {} not trained; rerun train to resume",
            missing.join(", ")
        )));
    }
    let vocab = load_vocab(&o.model, &m.vocabulary)?;
    let occ = tables::read_occurrences(&o.model.join(OCCURRENCES_FILE), &vocab, m.spans.len())?;
    let labels: Vec<String> = m.spans.iter().map(|s| s.label.clone()).collect();

    let candidates: Vec<u32> = match &o.baseline_words {
        None => (0..vocab.len() as u32).collect(),
        Some(words) => {
            let ids: Vec<u32> = words.iter().filter_map(|w| vocab.id(w)).collect();
            if ids.len() < words.len() {
                log::warn!(
                    "{} baseline word(s) are not in the vocabulary",
                    words.len() - ids.len()
                );
            }
            ids
        }
    };
    let n = o
        .baseline_sample
        .unwrap_or_else(|| DEFAULT_BASELINE_SAMPLE.min(candidates.len()));
    let sample = baseline_sample(&candidates, n, o.seed)?;

    let mut errors = Vec::new();
    let mut targets = Vec::new();
    for w in &o.words {
        match vocab.id(w) {
            Some(id) => targets.push((w.as_str(), id)),
            None => errors.push(WordError {
                word: w.clone(),
                message: format!("not in the vocabulary (min count {})", vocab.min_count()),
            }),
        }
    }
    let mut needed = sample.clone();
    needed.extend(targets.iter().map(|t| t.1));
    let paths: Vec<PathBuf> = m.spans.iter().map(|s| o.model.join(&s.file)).collect();
    let rows = RowSubset::load(&paths, &needed)?;
    let band = band_over(&rows, sample, o.seed)?;
    let mut reports = Vec::new();
    for (w, _) in targets {
        let series = self_similarity(&rows, &vocab, &occ, w)?;
        reports.push(detect_drops(&series, &band, &o.params)?);
    }

    fs::create_dir_all(&o.out).at(&o.out)?;
    let mut formats = o.formats.clone();
    formats.sort();
    formats.dedup();
    let mut outputs = Vec::new();
    let mut emit = |name: String, bytes: &[u8]| -> Result<()> {
        crate::write_atomic(&o.out.join(&name), bytes)?;
        outputs.push(name);
        Ok(())
    };
    let transition_of = |word: &str| {
        let year = *o.dictionary.get(word)?;
        m.time.span_of(year)?.checked_sub(1)
    };
    for f in formats {
        match f {
            OutputFormat::Csv => {
                emit("series.csv".into(), &report::series_csv(&reports, &labels))?;
                emit("band.csv".into(), &report::band_csv(&band))?;
            }
            OutputFormat::Json => {
                let ctx = ReportContext {
                    labels: &labels,
                    params: &o.params,
                    dictionary_year: &|w| o.dictionary.get(w).copied(),
                };
                emit(
                    "report.json".into(),
                    report::report_json(&ctx, &band, &reports, &errors).as_bytes(),
                )?;
            }
            OutputFormat::Svg => {
                for r in &reports {
                    let svg = report::svg_chart(r, &band, &labels, transition_of(&r.word));
                    emit(format!("{}.svg", r.word), svg.as_bytes())?;
                }
            }
        }
    }
    Ok(Analysis {
        labels,
        band,
        reports,
        errors,
        outputs,
    })
}

/// One line per word for the terminal.
pub fn summary_lines(a: &Analysis) -> Vec<String> {
    let mut out = Vec::new();
    for r in &a.reports {
        let flagged: Vec<String> = r
            .flagged()
            .map(|s| {
                let z = match s.z {
                    Some(z) if z.is_infinite() => "inf".to_string(),
                    Some(z) => format!("{z:.2}"),
                    None => "-".into(),
                };
                let drop = s.relative_drop.map_or("-".into(), |d| format!("{d:.3}"));
                format!(
                    "{} -> {} (z {z}, drop {drop})",
                    a.labels[s.transition],
                    a.labels[s.transition + 1]
                )
            })
            .collect();
        if flagged.is_empty() {
            out.push(format!("{}: no drop flagged", r.word));
        } else {
            out.push(format!("{}: {}", r.word, flagged.join("; ")));
        }
    }
    for e in &a.errors {
        out.push(format!("{}: error: {}", e.word, e.message));
    }
    out
}

/// Writes span `span` of a model as word2vec text.
pub fn export(model: &Path, span: &str, out: &Path) -> Result<()> {
    let m = manifest::read_model(model)?;
    let index = m
        .spans
        .iter()
        .position(|s| s.label == span || s.index.to_string() == span)
        .ok_or_else(|| Error::Usage(format!("no span {span:?} in the model")))?;
    if !m.completed.contains(&index) {
        return Err(Error::Data(format!("span {span} has not been trained")));
    }
    let vocab = load_vocab(model, &m.vocabulary)?;
    let space = space_file::read_space(&model.join(&m.spans[index].file))?;
    let mut buf = Vec::new();
    space_file::export_text(&mut buf, &space, &vocab).expect("writing to memory");
    crate::write_atomic(out, &buf)
}

/// Reads a list of words, one per line; blank lines and `#` comments are skipped.
pub fn read_word_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).at(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

/// Reads `word<TAB>year` lines.
pub fn read_dictionary(path: &Path) -> Result<BTreeMap<String, i32>> {
    let text = fs::read_to_string(path).at(path)?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (w, y) = line
            .split_once('\t')
            .ok_or_else(|| Error::format(path, format!("line {}: expected word<TAB>year", i + 1)))?;
        let y = y
            .trim()
            .parse()
            .map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))?;
        out.insert(w.trim().to_string(), y);
    }
    Ok(out)
}

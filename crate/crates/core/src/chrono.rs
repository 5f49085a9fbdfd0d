//! Span-by-span training where each span starts from the previously trained space.

use alloc::borrow::Cow;
use alloc::format;
use alloc::vec::Vec;

use crate::corpus::SpanCorpus;
use crate::rng;
use crate::sgns::{EmbeddingSpace, SequentialTrainer, SpanTrainer, TrainingConfig};
use crate::vocab::{NegativeSamplingTable, Vocabulary};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChainDirection {
    /// Latest span first, then backwards in time.
    Reverse,
    /// Earliest span first.
    Forward,
}

impl ChainDirection {
    /// Span indices in training order.
    pub fn order(self, span_count: usize) -> Vec<usize> {
        match self {
            ChainDirection::Reverse => (0..span_count).rev().collect(),
            ChainDirection::Forward => (0..span_count).collect(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChainDirection::Reverse => "reverse",
            ChainDirection::Forward => "forward",
        }
    }

    fn tag(self) -> u64 {
        match self {
            ChainDirection::Reverse => 0,
            ChainDirection::Forward => 1,
        }
    }
}

impl core::str::FromStr for ChainDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reverse" => Ok(ChainDirection::Reverse),
            "forward" => Ok(ChainDirection::Forward),
            other => Err(Error::config(format!("unknown direction {other:?}"))),
        }
    }
}

/// Training seed of one span: the run seed mixed with the span index and direction, so
/// any span can be retrained alone and the two directions never share a stream.
pub fn span_seed(seed: u64, span_index: usize, direction: ChainDirection) -> u64 {
    rng::derive(seed, ((span_index as u64) << 2) | direction.tag())
}

/// Seed of the random initialization of the first-trained span.
pub fn init_seed(seed: u64, direction: ChainDirection) -> u64 {
    rng::derive(seed, 0x1417_0000 | direction.tag())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainOptions {
    pub direction: ChainDirection,
    /// Per-span epoch counts, indexed by span; `None` uses the training config.
    pub span_epochs: Option<Vec<u32>>,
}

impl ChainOptions {
    pub fn new(direction: ChainDirection) -> Self {
        ChainOptions {
            direction,
            span_epochs: None,
        }
    }
}

/// Where the orchestrator gets span corpora and puts finished spaces.
pub trait ChainStore {
    type Error: From<Error>;

    fn load_span(&mut self, span_index: usize) -> Result<Cow<'_, SpanCorpus>, Self::Error>;

    /// A space trained by an earlier, interrupted run. Only asked for a prefix of the
    /// training order.
    fn completed(&mut self, _span_index: usize) -> Result<Option<EmbeddingSpace>, Self::Error> {
        Ok(None)
    }

    fn store(&mut self, space: &EmbeddingSpace) -> Result<(), Self::Error>;
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainSummary {
    /// Span indices in the order they were trained or resumed.
    pub order: Vec<usize>,
    pub resumed: Vec<usize>,
}

/// Trains `span_count` spans in `options.direction` order. At most the previous and the
/// current space are held at once; every finished space goes to `store`.
pub fn chain_train_with<S, T>(
    store: &mut S,
    span_count: usize,
    vocab: &Vocabulary,
    table: &NegativeSamplingTable,
    cfg: &TrainingConfig,
    options: &ChainOptions,
    trainer: &T,
) -> Result<ChainSummary, S::Error>
where
    S: ChainStore,
    T: SpanTrainer + ?Sized,
{
    cfg.validate()?;
    if span_count < 2 {
        return Err(Error::config("chaining needs at least two spans").into());
    }
    if let Some(e) = &options.span_epochs {
        if e.len() != span_count {
            return Err(Error::config(format!(
                "{} per-span epoch counts for {span_count} spans",
                e.len()
            ))
            .into());
        }
    }
    let direction = options.direction;
    let mut summary = ChainSummary::default();
    let mut previous: Option<EmbeddingSpace> = None;
    let mut resuming = true;
    for span in direction.order(span_count) {
        if resuming {
            if let Some(done) = store.completed(span)? {
                if done.dim() != cfg.dimension || done.vocab_size() != vocab.len() {
                    return Err(Error::DimensionMismatch {
                        expected: cfg.dimension,
                        actual: done.dim(),
                    }
                    .in_span(span)
                    .into());
                }
                summary.order.push(span);
                summary.resumed.push(span);
                previous = Some(done);
                continue;
            }
            resuming = false;
        }
        let init = match previous.take() {
            Some(p) => p,
            None => {
                EmbeddingSpace::init_random(vocab.len(), cfg.dimension, init_seed(cfg.seed, direction))?
            }
        };
        let mut span_cfg = cfg.clone();
        span_cfg.seed = span_seed(cfg.seed, span, direction);
        if let Some(e) = &options.span_epochs {
            span_cfg.epochs = e[span];
        }
        let space = {
            let corpus = store.load_span(span)?;
            if corpus.span_index != span {
                return Err(Error::config(format!(
                    "store returned span {} for span {span}",
                    corpus.span_index
                ))
                .into());
            }
            trainer
                .train_span(&corpus, vocab, table, &init, &span_cfg)
                .map_err(|e| e.in_span(span))?
        };
        drop(init);
        store.store(&space)?;
        summary.order.push(span);
        previous = Some(space);
    }
    Ok(summary)
}

/// All spaces of a chained run, indexed by span.
#[derive(Debug, Clone, PartialEq)]
pub struct ChronoModel {
    pub spaces: Vec<EmbeddingSpace>,
    pub direction: ChainDirection,
    pub cfg: TrainingConfig,
    pub training_order: Vec<usize>,
}

impl ChronoModel {
    pub fn span_count(&self) -> usize {
        self.spaces.len()
    }
}

struct MemoryStore<'a> {
    spans: &'a [SpanCorpus],
    spaces: Vec<Option<EmbeddingSpace>>,
}

impl ChainStore for MemoryStore<'_> {
    type Error = Error;

    fn load_span(&mut self, span_index: usize) -> Result<Cow<'_, SpanCorpus>> {
        Ok(Cow::Borrowed(&self.spans[span_index]))
    }

    fn store(&mut self, space: &EmbeddingSpace) -> Result<()> {
        self.spaces[space.span_index] = Some(space.clone());
        Ok(())
    }
}

/// In-memory chained training with the sequential trainer.
pub fn chain_train(
    spans: &[SpanCorpus],
    vocab: &Vocabulary,
    table: &NegativeSamplingTable,
    cfg: &TrainingConfig,
    direction: ChainDirection,
) -> Result<ChronoModel> {
    chain_train_in_memory(spans, vocab, table, cfg, &ChainOptions::new(direction), &SequentialTrainer)
}

pub fn chain_train_in_memory<T: SpanTrainer + ?Sized>(
    spans: &[SpanCorpus],
    vocab: &Vocabulary,
    table: &NegativeSamplingTable,
    cfg: &TrainingConfig,
    options: &ChainOptions,
    trainer: &T,
) -> Result<ChronoModel> {
    for (i, s) in spans.iter().enumerate() {
        if s.span_index != i {
            return Err(Error::config(format!(
                "spans out of order: position {i} holds span {}",
                s.span_index
            )));
        }
    }
    let mut store = MemoryStore {
        spans,
        spaces: alloc::vec![None; spans.len()],
    };
    let summary =
        chain_train_with(&mut store, spans.len(), vocab, table, cfg, options, trainer)?;
    Ok(ChronoModel {
        spaces: store.spaces.into_iter().map(|s| s.expect("every span trained")).collect(),
        direction: options.direction,
        cfg: cfg.clone(),
        training_order: summary.order,
    })
}

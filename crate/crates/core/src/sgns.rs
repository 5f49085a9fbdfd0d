//! Skip-gram with negative sampling over one span corpus.
//!
//! Matrices are `f32`, dot products accumulate in `f64`, and the sigmoid is evaluated
//! directly on logits clamped to ±30. For a pair `(center, context)` with negatives `n_i`
//! the loss is `-ln σ(u_c·v) - Σ ln σ(-u_n·v)` with `v = W_in[center]`, `u = W_out[·]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::corpus::SpanCorpus;
use crate::math;
use crate::rng::{self, ChaCha8Rng};
use crate::vocab::{NegativeSamplingTable, Vocabulary};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", tag = "kind"))]
pub enum LrSchedule {
    Constant,
    /// Linear from the initial rate down to `min_lr` over the span's training positions.
    LinearDecay { min_lr: f32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WindowMode {
    /// Effective window drawn uniformly from `1..=window` per position.
    Dynamic,
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainingConfig {
    pub dimension: usize,
    pub window: usize,
    pub learning_rate: f32,
    pub negatives: usize,
    pub epochs: u32,
    pub lr_schedule: LrSchedule,
    pub window_mode: WindowMode,
    /// Frequent-word subsampling threshold; `None` disables it.
    pub subsample: Option<f64>,
    pub seed: u64,
    pub threads: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            dimension: 200,
            window: 5,
            learning_rate: 0.01,
            negatives: 5,
            epochs: 5,
            lr_schedule: LrSchedule::LinearDecay { min_lr: 0.0001 },
            window_mode: WindowMode::Dynamic,
            subsample: None,
            seed: 1,
            threads: 1,
        }
    }
}

impl TrainingConfig {
    /// Zero epochs are accepted: training then returns its initialization unchanged.
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::config("dimension must be at least 1"));
        }
        if self.window == 0 {
            return Err(Error::config("window must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::config("learning rate must be positive"));
        }
        if let LrSchedule::LinearDecay { min_lr } = self.lr_schedule {
            if !(min_lr.is_finite() && min_lr > 0.0 && min_lr <= self.learning_rate) {
                return Err(Error::config(
                    "min_lr must be positive and not above the learning rate",
                ));
            }
        }
        if self.negatives == 0 {
            return Err(Error::config("at least one negative sample is needed"));
        }
        if self.threads == 0 {
            return Err(Error::config("threads must be at least 1"));
        }
        if let Some(t) = self.subsample {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::config("subsample threshold must be positive"));
            }
        }
        Ok(())
    }

    /// Learning rate after `progress` (0 to 1) of the span's positions.
    pub fn learning_rate_at(&self, progress: f64) -> f32 {
        match self.lr_schedule {
            LrSchedule::Constant => self.learning_rate,
            LrSchedule::LinearDecay { min_lr } => {
                let p = progress.clamp(0.0, 1.0) as f32;
                self.learning_rate + (min_lr - self.learning_rate) * p
            }
        }
    }
}

/// Input (target) and output (context) matrices of one span, row-major `vocab_size × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    vocab_size: usize,
    dim: usize,
    input: Vec<f32>,
    output: Vec<f32>,
    pub trained_token_count: u64,
    pub span_index: usize,
}

impl EmbeddingSpace {
    /// `W_in` uniform in `[-0.5/d, 0.5/d]`, `W_out` zero.
    pub fn init_random(vocab_size: usize, dim: usize, seed: u64) -> Result<Self> {
        if vocab_size == 0 || dim == 0 {
            return Err(Error::config("vocabulary size and dimension must be positive"));
        }
        let mut rng = rng::seeded(seed);
        let half = 0.5 / dim as f64;
        let input = (0..vocab_size * dim)
            .map(|_| ((rng::unit_f64(&mut rng) * 2.0 - 1.0) * half) as f32)
            .collect();
        Ok(EmbeddingSpace {
            vocab_size,
            dim,
            input,
            output: vec![0.0; vocab_size * dim],
            trained_token_count: 0,
            span_index: 0,
        })
    }

    pub fn from_parts(
        vocab_size: usize,
        dim: usize,
        input: Vec<f32>,
        output: Vec<f32>,
    ) -> Result<Self> {
        let n = vocab_size
            .checked_mul(dim)
            .ok_or_else(|| Error::config("matrix size overflows"))?;
        for m in [&input, &output] {
            if m.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: m.len(),
                });
            }
        }
        let space = EmbeddingSpace {
            vocab_size,
            dim,
            input,
            output,
            trained_token_count: 0,
            span_index: 0,
        };
        if !space.is_finite() {
            return Err(Error::config("matrices contain non-finite values"));
        }
        Ok(space)
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input(&self) -> &[f32] {
        &self.input
    }

    pub fn output(&self) -> &[f32] {
        &self.output
    }

    pub fn input_mut(&mut self) -> &mut [f32] {
        &mut self.input
    }

    pub fn output_mut(&mut self) -> &mut [f32] {
        &mut self.output
    }

    /// Both matrices at once, for trainers that update them concurrently.
    pub fn matrices_mut(&mut self) -> (&mut [f32], &mut [f32]) {
        (&mut self.input, &mut self.output)
    }

    pub fn input_row(&self, id: u32) -> &[f32] {
        let d = self.dim;
        &self.input[id as usize * d..(id as usize + 1) * d]
    }

    pub fn output_row(&self, id: u32) -> &[f32] {
        let d = self.dim;
        &self.output[id as usize * d..(id as usize + 1) * d]
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|x| x.is_finite())
    }

    /// Multiplies both matrices by `factor`.
    pub fn scale(&mut self, factor: f32) {
        for x in self.input.iter_mut().chain(self.output.iter_mut()) {
            *x *= factor;
        }
    }

    /// Bytes held by the two matrices.
    pub fn matrix_bytes(&self) -> usize {
        (self.input.len() + self.output.len()) * core::mem::size_of::<f32>()
    }
}

/// Loss and gradients of one pair in `f64`. `targets[0]` is the context, the rest the
/// negatives in order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient {
    pub loss: f64,
    pub center: Vec<f64>,
    pub targets: Vec<Vec<f64>>,
}

pub fn pair_gradient(center: &[f32], context: &[f32], negatives: &[&[f32]]) -> PairGradient {
    let d = center.len();
    let mut out = PairGradient {
        loss: 0.0,
        center: vec![0.0; d],
        targets: Vec::with_capacity(1 + negatives.len()),
    };
    let rows = core::iter::once((context, 1.0)).chain(negatives.iter().map(|n| (*n, 0.0)));
    for (u, label) in rows {
        let score = math::dot(center, u);
        // label 1 contributes -ln σ(s), label 0 contributes -ln σ(-s)
        out.loss -= math::ln_sigmoid(if label == 1.0 { score } else { -score });
        let g = math::sigmoid(score) - label;
        for (c, &x) in out.center.iter_mut().zip(u) {
            *c += g * f64::from(x);
        }
        out.targets
            .push(center.iter().map(|&x| g * f64::from(x)).collect());
    }
    out
}

/// Marker for a non-finite score inside [`apply_target`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonFinite;

/// One SGD step for a single output row: updates `target` in place and accumulates the
/// center's step into `center_step`, computed from the row before its update.
#[inline]
pub fn apply_target(
    center: &[f32],
    target: &mut [f32],
    label: f32,
    lr: f32,
    center_step: &mut [f32],
) -> core::result::Result<(), NonFinite> {
    let score = math::dot(center, target);
    if !score.is_finite() {
        return Err(NonFinite);
    }
    let g = ((f64::from(label) - math::sigmoid(score)) * f64::from(lr)) as f32;
    for ((u, s), &v) in target.iter_mut().zip(center_step.iter_mut()).zip(center) {
        *s += g * *u;
        *u += g * v;
    }
    Ok(())
}

fn check_ids(space: &EmbeddingSpace, ids: &[u32]) -> Result<()> {
    if let Some(&bad) = ids.iter().find(|&&i| i as usize >= space.vocab_size) {
        return Err(Error::config(format!(
            "id {bad} outside vocabulary of {}",
            space.vocab_size
        )));
    }
    Ok(())
}

/// Applies one SGD step of the pair loss. Only `W_in[center]` and the output rows of
/// `context` and `negatives` change.
pub fn sgns_pair_update(
    space: &mut EmbeddingSpace,
    center: u32,
    context: u32,
    negatives: &[u32],
    lr: f32,
) -> Result<()> {
    check_ids(space, &[center, context])?;
    check_ids(space, negatives)?;
    if !(lr.is_finite() && lr > 0.0) {
        return Err(Error::config("learning rate must be positive"));
    }
    let mut step = vec![0.0f32; space.dim];
    pair_update_unchecked(space, center, context, negatives, lr, &mut step)
}

#[inline]
fn pair_update_unchecked(
    space: &mut EmbeddingSpace,
    center: u32,
    context: u32,
    negatives: &[u32],
    lr: f32,
    step: &mut [f32],
) -> Result<()> {
    let d = space.dim;
    step.fill(0.0);
    let c = center as usize * d;
    let v = &space.input[c..c + d];
    let rows = core::iter::once((context, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
    for (target, label) in rows {
        let t = target as usize * d;
        apply_target(v, &mut space.output[t..t + d], label, lr, step).map_err(|_| {
            Error::NumericFailure {
                span: space.span_index,
                center,
                target,
                learning_rate: lr,
            }
        })?;
    }
    for (x, s) in space.input[c..c + d].iter_mut().zip(step.iter()) {
        *x += s;
    }
    Ok(())
}

/// Enumerates training pairs of a sentence: effective window, context positions and
/// freshly drawn negatives. Shared by the sequential and parallel trainers.
pub struct PairSampler<'a> {
    cfg: &'a TrainingConfig,
    table: &'a NegativeSamplingTable,
    keep: Option<Vec<f64>>,
}

impl<'a> PairSampler<'a> {
    pub fn new(cfg: &'a TrainingConfig, vocab: &Vocabulary, table: &'a NegativeSamplingTable) -> Self {
        let keep = cfg.subsample.map(|t| {
            let total = vocab.total_count() as f64;
            vocab
                .counts()
                .iter()
                .map(|&c| {
                    let f = c as f64;
                    ((math::sqrt(f / (t * total)) + 1.0) * (t * total) / f).min(1.0)
                })
                .collect()
        });
        PairSampler { cfg, table, keep }
    }

    /// Walks `sentence`, calling `update(center, context, negatives, lr)` per pair.
    /// `lr_at(i)` gives the rate for the `i`th kept position of the sentence.
    /// Returns the number of kept positions.
    pub fn walk<L, U>(
        &self,
        sentence: &[u32],
        rng: &mut ChaCha8Rng,
        kept: &mut Vec<u32>,
        negatives: &mut Vec<u32>,
        mut lr_at: L,
        mut update: U,
    ) -> Result<u64>
    where
        L: FnMut(u64) -> f32,
        U: FnMut(u32, u32, &[u32], f32) -> Result<()>,
    {
        let tokens: &[u32] = match &self.keep {
            None => sentence,
            Some(keep) => {
                kept.clear();
                for &w in sentence {
                    let p = keep[w as usize];
                    if p >= 1.0 || rng::unit_f64(rng) < p {
                        kept.push(w);
                    }
                }
                kept
            }
        };
        let window = self.cfg.window;
        for (pos, &center) in tokens.iter().enumerate() {
            let lr = lr_at(pos as u64);
            let b = match self.cfg.window_mode {
                WindowMode::Dynamic => rng.gen_range(1..=window),
                WindowMode::Fixed => window,
            };
            let lo = pos.saturating_sub(b);
            let hi = (pos + b + 1).min(tokens.len());
            for (cpos, &context) in tokens.iter().enumerate().take(hi).skip(lo) {
                if cpos == pos {
                    continue;
                }
                negatives.clear();
                for _ in 0..self.cfg.negatives {
                    let mut n = self.table.sample(rng);
                    if n == context {
                        n = self.table.sample(rng);
                    }
                    negatives.push(n);
                }
                update(center, context, negatives, lr)?;
            }
        }
        Ok(tokens.len() as u64)
    }
}

/// Something that can train one span from a warm start.
pub trait SpanTrainer {
    fn train_span(
        &self,
        corpus: &SpanCorpus,
        vocab: &Vocabulary,
        table: &NegativeSamplingTable,
        init: &EmbeddingSpace,
        cfg: &TrainingConfig,
    ) -> Result<EmbeddingSpace>;
}

/// Single-threaded, bit-reproducible trainer.
#[derive(Debug, Clone, Copy, Default)]
pub struct SequentialTrainer;

impl SpanTrainer for SequentialTrainer {
    fn train_span(
        &self,
        corpus: &SpanCorpus,
        vocab: &Vocabulary,
        table: &NegativeSamplingTable,
        init: &EmbeddingSpace,
        cfg: &TrainingConfig,
    ) -> Result<EmbeddingSpace> {
        train_span(corpus, vocab, table, init, cfg)
    }
}

/// Checks shapes shared by every trainer. Returns `false` when there is nothing to train.
pub fn prepare_span(
    corpus: &SpanCorpus,
    vocab: &Vocabulary,
    table: &NegativeSamplingTable,
    init: &EmbeddingSpace,
    cfg: &TrainingConfig,
) -> Result<bool> {
    cfg.validate()?;
    if init.dim != cfg.dimension {
        return Err(Error::DimensionMismatch {
            expected: cfg.dimension,
            actual: init.dim,
        });
    }
    if init.vocab_size != vocab.len() || table.len() != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            actual: if init.vocab_size != vocab.len() {
                init.vocab_size
            } else {
                table.len()
            },
        });
    }
    if let Some(bad) = corpus.tokens().find(|&id| id as usize >= vocab.len()) {
        return Err(Error::config(format!(
            "token id {bad} outside vocabulary of {}",
            vocab.len()
        )));
    }
    if corpus.is_empty() {
        log::warn!(
            "span {} has no tokens; keeping its initialization",
            corpus.span_index
        );
        return Ok(false);
    }
    Ok(cfg.epochs > 0)
}

/// Trains a copy of `init` on `corpus`; `init` is never modified.
pub fn train_span(
    corpus: &SpanCorpus,
    vocab: &Vocabulary,
    table: &NegativeSamplingTable,
    init: &EmbeddingSpace,
    cfg: &TrainingConfig,
) -> Result<EmbeddingSpace> {
    let mut space = init.clone();
    space.span_index = corpus.span_index;
    space.trained_token_count = 0;
    if !prepare_span(corpus, vocab, table, init, cfg)? {
        return Ok(space);
    }

    let sampler = PairSampler::new(cfg, vocab, table);
    let mut rng = rng::seeded(cfg.seed);
    let total = (corpus.token_count * u64::from(cfg.epochs)) as f64;
    let mut done = 0u64;
    let mut kept = Vec::new();
    let mut negatives = Vec::with_capacity(cfg.negatives);
    let mut step = vec![0.0f32; cfg.dimension];
    for _ in 0..cfg.epochs {
        for sentence in &corpus.sentences {
            let base = done;
            let kept_positions = sampler.walk(
                sentence,
                &mut rng,
                &mut kept,
                &mut negatives,
                |i| cfg.learning_rate_at((base + i) as f64 / total),
                |center, context, negs, lr| {
                    pair_update_unchecked(&mut space, center, context, negs, lr, &mut step)
                },
            )?;
            space.trained_token_count += kept_positions;
            done += sentence.len() as u64;
        }
    }
    if !space.is_finite() {
        return Err(Error::NumericFailure {
            span: space.span_index,
            center: 0,
            target: 0,
            learning_rate: cfg.learning_rate,
        });
    }
    Ok(space)
}

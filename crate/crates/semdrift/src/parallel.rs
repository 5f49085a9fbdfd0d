//! Lock-free multi-threaded training.
//!
//! Workers share both matrices and update rows without locks, so concurrent updates to
//! the same row can interleave and results depend on scheduling. Use one thread when
//! bit-identical output matters.

#![allow(unsafe_code)]

use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, Ordering};

use semdrift_core::corpus::SpanCorpus;
use semdrift_core::rng;
use semdrift_core::sgns::{apply_target, prepare_span, EmbeddingSpace, PairSampler, SpanTrainer, TrainingConfig};
use semdrift_core::vocab::{NegativeSamplingTable, Vocabulary};
use semdrift_core::{Error, Result};

fn as_atomic(s: &mut [f32]) -> &[AtomicU32] {
    // SAFETY: `AtomicU32` has the size and alignment of `u32`, which match `f32`, and
    // the exclusive borrow guarantees no other non-atomic access while the view lives.
    unsafe { &*(s as *mut [f32] as *const [AtomicU32]) }
}

fn load(row: &[AtomicU32], out: &mut [f32]) {
    for (o, a) in out.iter_mut().zip(row) {
        *o = f32::from_bits(a.load(Ordering::Relaxed));
    }
}

fn store(row: &[AtomicU32], values: &[f32]) {
    for (a, v) in row.iter().zip(values) {
        a.store(v.to_bits(), Ordering::Relaxed);
    }
}

/// Splits sentences round-robin over `cfg.threads` workers sharing one space.
#[derive(Debug, Clone, Copy, Default)]
pub struct HogwildTrainer;

impl SpanTrainer for HogwildTrainer {
    fn train_span(
        &self,
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
        let span = space.span_index;
        let d = cfg.dimension;
        let threads = cfg.threads.max(1);
        let sampler = PairSampler::new(cfg, vocab, table);
        let total = (corpus.token_count * u64::from(cfg.epochs)) as f64;
        let progress = AtomicU64::new(0);
        let stop = AtomicBool::new(false);

        let (win, wout) = space.matrices_mut();
        let (win, wout) = (as_atomic(win), as_atomic(wout));
        let results: Vec<Result<u64>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|w| {
                    let (sampler, progress, stop) = (&sampler, &progress, &stop);
                    scope.spawn(move || -> Result<u64> {
                        let mut rng = rng::seeded(rng::derive(cfg.seed, w as u64 + 1));
                        let (mut kept, mut negatives) = (Vec::new(), Vec::new());
                        let mut center = vec![0.0f32; d];
                        let mut target = vec![0.0f32; d];
                        let mut step = vec![0.0f32; d];
                        let mut trained = 0u64;
                        for _ in 0..cfg.epochs {
                            for sentence in corpus.sentences.iter().skip(w).step_by(threads) {
                                if stop.load(Ordering::Relaxed) {
                                    return Ok(trained);
                                }
                                let base = progress.load(Ordering::Relaxed);
                                trained += sampler.walk(
                                    sentence,
                                    &mut rng,
                                    &mut kept,
                                    &mut negatives,
                                    |i| cfg.learning_rate_at((base + i) as f64 / total),
                                    |c, context, negs, lr| {
                                        let crow = &win[c as usize * d..][..d];
                                        load(crow, &mut center);
                                        step.fill(0.0);
                                        let rows = std::iter::once((context, 1.0))
                                            .chain(negs.iter().map(|&n| (n, 0.0)));
                                        for (t, label) in rows {
                                            let trow = &wout[t as usize * d..][..d];
                                            load(trow, &mut target);
                                            apply_target(&center, &mut target, label, lr, &mut step)
                                                .map_err(|_| Error::NumericFailure {
                                                    span,
                                                    center: c,
                                                    target: t,
                                                    learning_rate: lr,
                                                })?;
                                            store(trow, &target);
                                        }
                                        for (x, s) in center.iter_mut().zip(&step) {
                                            *x += s;
                                        }
                                        store(crow, &center);
                                        Ok(())
                                    },
                                )
                                .inspect_err(|_| stop.store(true, Ordering::Relaxed))?;
                                progress.fetch_add(sentence.len() as u64, Ordering::Relaxed);
                            }
                        }
                        Ok(trained)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        });
        for r in results {
            space.trained_token_count += r?;
        }
        if !space.is_finite() {
            return Err(Error::NumericFailure {
                span,
                center: 0,
                target: 0,
                learning_rate: cfg.learning_rate,
            });
        }
        Ok(space)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use semdrift_core::sgns::SequentialTrainer;

    fn setup() -> (SpanCorpus, Vocabulary, NegativeSamplingTable) {
        let words: Vec<String> = (0..40).map(|i| format!("w{i:02}")).collect();
        let vocab = Vocabulary::from_counts(words.iter().map(|w| (w.clone(), 10)), 1).unwrap();
        let sentences = (0..400u32)
            .map(|i| (0..8).map(|j| (i * 7 + j * 3) % 40).collect())
            .collect();
        let table = NegativeSamplingTable::new(&vocab, 0.75).unwrap();
        (SpanCorpus::new(1, sentences), vocab, table)
    }

    #[test]
    fn workers_cover_every_position() {
        let (corpus, vocab, table) = setup();
        let cfg = TrainingConfig {
            dimension: 16,
            epochs: 2,
            threads: 3,
            ..TrainingConfig::default()
        };
        let init = EmbeddingSpace::init_random(vocab.len(), 16, 5).unwrap();
        let par = HogwildTrainer.train_span(&corpus, &vocab, &table, &init, &cfg).unwrap();
        let seq = SequentialTrainer.train_span(&corpus, &vocab, &table, &init, &cfg).unwrap();
        assert!(par.is_finite());
        assert_eq!(par.span_index, 1);
        assert_eq!(par.trained_token_count, seq.trained_token_count);
        assert_ne!(par.input(), init.input());
        assert!(par.output().iter().any(|&x| x != 0.0));
    }

    #[test]
    fn zero_epochs_return_init() {
        let (corpus, vocab, table) = setup();
        let cfg = TrainingConfig {
            dimension: 8,
            epochs: 0,
            threads: 2,
            ..TrainingConfig::default()
        };
        let init = EmbeddingSpace::init_random(vocab.len(), 8, 5).unwrap();
        let out = HogwildTrainer.train_span(&corpus, &vocab, &table, &init, &cfg).unwrap();
        assert_eq!(out.input(), init.input());
    }

    #[test]
    fn blow_up_is_reported() {
        let (corpus, vocab, table) = setup();
        let cfg = TrainingConfig {
            dimension: 8,
            epochs: 1,
            threads: 2,
            learning_rate: 1e38,
            lr_schedule: semdrift_core::sgns::LrSchedule::Constant,
            ..TrainingConfig::default()
        };
        let mut init = EmbeddingSpace::init_random(vocab.len(), 8, 5).unwrap();
        init.output_mut().fill(1e30);
        let err = HogwildTrainer.train_span(&corpus, &vocab, &table, &init, &cfg).unwrap_err();
        assert!(matches!(err, Error::NumericFailure { .. }), "{err}");
    }
}

//! Consecutive-span self-similarity, the random-sample baseline band and drop detection.
//!
//! Only input vectors (`W_in`) take part in the analysis.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chrono::ChronoModel;
use crate::corpus::SpanCorpus;
use crate::sgns::EmbeddingSpace;
use crate::vocab::Vocabulary;
use crate::{math, rng, Error, Result};

/// Norms below this make a cosine undefined.
pub const MIN_NORM: f64 = 1e-12;
/// Smallest baseline sample that is accepted.
pub const MIN_BASELINE_SAMPLE: usize = 30;
pub const DEFAULT_BASELINE_SAMPLE: usize = 5000;

/// Input vectors of every span.
pub trait SpanVectors {
    fn span_count(&self) -> usize;
    fn dim(&self) -> usize;
    fn vocab_size(&self) -> usize;
    fn input_row(&self, span: usize, id: u32) -> &[f32];
}

impl SpanVectors for [EmbeddingSpace] {
    fn span_count(&self) -> usize {
        self.len()
    }

    fn dim(&self) -> usize {
        self.first().map_or(0, EmbeddingSpace::dim)
    }

    fn vocab_size(&self) -> usize {
        self.first().map_or(0, EmbeddingSpace::vocab_size)
    }

    fn input_row(&self, span: usize, id: u32) -> &[f32] {
        self[span].input_row(id)
    }
}

impl SpanVectors for ChronoModel {
    fn span_count(&self) -> usize {
        self.spaces.len()
    }

    fn dim(&self) -> usize {
        self.spaces.as_slice().dim()
    }

    fn vocab_size(&self) -> usize {
        self.spaces.as_slice().vocab_size()
    }

    fn input_row(&self, span: usize, id: u32) -> &[f32] {
        self.spaces[span].input_row(id)
    }
}

/// Cosine similarity, `None` when either norm is below [`MIN_NORM`].
pub fn cosine(u: &[f32], v: &[f32]) -> Result<Option<f64>> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    if u.is_empty() {
        return Err(Error::config("cosine of zero-dimensional vectors"));
    }
    let uu = math::dot(u, u);
    let vv = math::dot(v, v);
    if math::sqrt(uu) < MIN_NORM || math::sqrt(vv) < MIN_NORM {
        return Ok(None);
    }
    // One square root of the product keeps cosine(v, v) at exactly 1.0.
    Ok(Some((math::dot(u, v) / math::sqrt(uu * vv)).clamp(-1.0, 1.0)))
}

/// Per-span occurrence counts of every vocabulary id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceTable {
    per_span: Vec<Vec<u64>>,
}

impl OccurrenceTable {
    pub fn from_spans(spans: &[SpanCorpus], vocab_size: usize) -> Self {
        OccurrenceTable {
            per_span: spans.iter().map(|s| s.occurrences(vocab_size)).collect(),
        }
    }

    /// `rows[span][id]`; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        if let Some(first) = rows.first() {
            if let Some(bad) = rows.iter().find(|r| r.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    actual: bad.len(),
                });
            }
        }
        Ok(OccurrenceTable { per_span: rows })
    }

    pub fn span_count(&self) -> usize {
        self.per_span.len()
    }

    pub fn count(&self, span: usize, id: u32) -> u64 {
        self.per_span[span][id as usize]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.per_span
    }
}

/// Cosine of one word between span `t` and span `t + 1`, for every `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilaritySeries {
    pub word: String,
    pub id: u32,
    /// `None` where the cosine is undefined.
    pub values: Vec<Option<f64>>,
    /// One per span, so one longer than `values`.
    pub occurrence_counts: Vec<u64>,
}

/// Transition-by-transition cosines of one id.
pub fn series_values<M: SpanVectors + ?Sized>(model: &M, id: u32) -> Result<Vec<Option<f64>>> {
    if id as usize >= model.vocab_size() {
        return Err(Error::config(format!(
            "id {id} outside vocabulary of {}",
            model.vocab_size()
        )));
    }
    (0..model.span_count().saturating_sub(1))
        .map(|t| cosine(model.input_row(t, id), model.input_row(t + 1, id)))
        .collect()
}

pub fn self_similarity<M: SpanVectors + ?Sized>(
    model: &M,
    vocab: &Vocabulary,
    occurrences: &OccurrenceTable,
    word: &str,
) -> Result<SimilaritySeries> {
    if model.span_count() < 2 {
        return Err(Error::config("self-similarity needs at least two spans"));
    }
    if model.vocab_size() != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            actual: model.vocab_size(),
        });
    }
    if occurrences.span_count() != model.span_count() {
        return Err(Error::DimensionMismatch {
            expected: model.span_count(),
            actual: occurrences.span_count(),
        });
    }
    let id = vocab.require(word)?;
    Ok(SimilaritySeries {
        word: word.into(),
        id,
        values: series_values(model, id)?,
        occurrence_counts: (0..model.span_count())
            .map(|s| occurrences.count(s, id))
            .collect(),
    })
}

/// Mean and standard deviation of self-similarity over a fixed random word sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineBand {
    /// `None` when no sampled word had a defined cosine at the transition.
    pub means: Vec<Option<f64>>,
    /// Population standard deviation.
    pub stds: Vec<Option<f64>>,
    pub n_effective: Vec<usize>,
    /// Sampled words left out of a transition for an undefined cosine.
    pub excluded: Vec<usize>,
    /// Sampled ids, ascending.
    pub sample: Vec<u32>,
    pub sample_size: usize,
    pub sample_seed: u64,
}

impl BaselineBand {
    pub fn transitions(&self) -> usize {
        self.means.len()
    }
}

/// Band over `sample_size` words drawn without replacement from the whole vocabulary.
pub fn baseline<M: SpanVectors + ?Sized>(
    model: &M,
    vocab: &Vocabulary,
    sample_size: usize,
    seed: u64,
) -> Result<BaselineBand> {
    if model.vocab_size() != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            actual: model.vocab_size(),
        });
    }
    let all: Vec<u32> = (0..vocab.len() as u32).collect();
    baseline_from(model, &all, sample_size, seed)
}

/// Band over `sample_size` words drawn without replacement from `candidates`.
pub fn baseline_from<M: SpanVectors + ?Sized>(
    model: &M,
    candidates: &[u32],
    sample_size: usize,
    seed: u64,
) -> Result<BaselineBand> {
    let sample = baseline_sample(candidates, sample_size, seed)?;
    band_over(model, sample, seed)
}

/// The sorted word ids [`baseline_from`] would use, without touching any vectors.
pub fn baseline_sample(candidates: &[u32], sample_size: usize, seed: u64) -> Result<Vec<u32>> {
    if sample_size < MIN_BASELINE_SAMPLE {
        return Err(Error::config(format!(
            "baseline sample of {sample_size} words is below the minimum of {MIN_BASELINE_SAMPLE}"
        )));
    }
    let mut pool = candidates.to_vec();
    pool.sort_unstable();
    pool.dedup();
    if sample_size > pool.len() {
        return Err(Error::config(format!(
            "baseline sample of {sample_size} exceeds the {} candidate words",
            pool.len()
        )));
    }
    let mut r = rng::seeded(seed);
    for i in 0..sample_size {
        let j = i + rng::below(&mut r, pool.len() - i);
        pool.swap(i, j);
    }
    pool.truncate(sample_size);
    pool.sort_unstable();
    Ok(pool)
}

/// Band over an explicit sample. `sample_seed` is only recorded.
pub fn band_over<M: SpanVectors + ?Sized>(
    model: &M,
    sample: Vec<u32>,
    sample_seed: u64,
) -> Result<BaselineBand> {
    if let Some(&bad) = sample.iter().find(|&&id| id as usize >= model.vocab_size()) {
        return Err(Error::config(format!(
            "sample id {bad} outside vocabulary of {}",
            model.vocab_size()
        )));
    }
    let pool = sample;
    let sample_size = pool.len();
    let transitions = model.span_count().saturating_sub(1);
    let mut per_transition: Vec<Vec<f64>> = alloc::vec![Vec::with_capacity(sample_size); transitions];
    let mut excluded = alloc::vec![0usize; transitions];
    for &id in &pool {
        for (t, v) in series_values(model, id)?.into_iter().enumerate() {
            match v {
                Some(v) => per_transition[t].push(v),
                None => excluded[t] += 1,
            }
        }
    }
    let mut means = Vec::with_capacity(transitions);
    let mut stds = Vec::with_capacity(transitions);
    let mut n_effective = Vec::with_capacity(transitions);
    for values in &per_transition {
        n_effective.push(values.len());
        if values.is_empty() {
            means.push(None);
            stds.push(None);
            continue;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        means.push(Some(mean));
        stds.push(Some(math::sqrt(var)));
    }
    Ok(BaselineBand {
        means,
        stds,
        n_effective,
        excluded,
        sample: pool,
        sample_size,
        sample_seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectionParams {
    pub z_threshold: f64,
    pub min_relative_drop: f64,
    pub min_occurrences: u64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            z_threshold: 2.0,
            min_relative_drop: 0.1,
            min_occurrences: 5,
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        if !self.z_threshold.is_finite() || !self.min_relative_drop.is_finite() {
            return Err(Error::config("detection thresholds must be finite"));
        }
        Ok(())
    }
}

/// Evaluation of one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionScore {
    pub transition: usize,
    /// `(mean - value) / std`; `+inf` when the band has zero spread and the value is below
    /// its mean. `None` when the value or the band is undefined.
    pub z: Option<f64>,
    /// Relative drop against the median of earlier values; `None` when there are none.
    pub relative_drop: Option<f64>,
    pub enough_occurrences: bool,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftReport {
    pub word: String,
    pub series: SimilaritySeries,
    pub scores: Vec<TransitionScore>,
    pub params: DetectionParams,
}

impl ShiftReport {
    pub fn flagged(&self) -> impl Iterator<Item = &TransitionScore> {
        self.scores.iter().filter(|s| s.flagged)
    }

    pub fn flagged_transitions(&self) -> Vec<usize> {
        self.flagged().map(|s| s.transition).collect()
    }
}

/// Flags transition `t` when the value sits at least `z_threshold` band deviations below
/// the band mean, has dropped by at least `min_relative_drop` relative to the median of the
/// earlier values (waived when there are none), and the word occurs at least
/// `min_occurrences` times in both spans.
pub fn detect_drops(
    series: &SimilaritySeries,
    band: &BaselineBand,
    params: &DetectionParams,
) -> Result<ShiftReport> {
    params.validate()?;
    let n = series.values.len();
    if band.transitions() != n || series.occurrence_counts.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: band.transitions(),
        });
    }
    let mut scores = Vec::with_capacity(n);
    let mut earlier: Vec<f64> = Vec::with_capacity(n);
    for t in 0..n {
        let value = series.values[t];
        let enough_occurrences = series.occurrence_counts[t] >= params.min_occurrences
            && series.occurrence_counts[t + 1] >= params.min_occurrences;
        let z = match (value, band.means[t], band.stds[t]) {
            (Some(v), Some(mean), Some(std)) => Some(if std > 0.0 {
                (mean - v) / std
            } else if v < mean {
                f64::INFINITY
            } else if v > mean {
                f64::NEG_INFINITY
            } else {
                0.0
            }),
            _ => None,
        };
        let (relative_drop, drop_ok) = match value {
            Some(v) if !earlier.is_empty() => {
                let m = math::median_in_place(&mut earlier.clone());
                if m > 0.0 {
                    let r = (m - v) / m;
                    (Some(r), r >= params.min_relative_drop)
                } else {
                    (None, false)
                }
            }
            _ => (None, true),
        };
        let flagged = value.is_some()
            && enough_occurrences
            && drop_ok
            && z.is_some_and(|z| z >= params.z_threshold);
        scores.push(TransitionScore {
            transition: t,
            z,
            relative_drop,
            enough_occurrences,
            flagged,
        });
        if let Some(v) = value {
            earlier.push(v);
        }
    }
    Ok(ShiftReport {
        word: series.word.clone(),
        series: series.clone(),
        scores,
        params: *params,
    })
}

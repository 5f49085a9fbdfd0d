use proptest::prelude::*;
use rand::seq::SliceRandom;
use semdrift_core::corpus::{bucket, tokenize, Document, SpanCorpus, TimeSpanConfig};
use semdrift_core::rng;
use semdrift_core::sgns::EmbeddingSpace;
use semdrift_core::shift::{
    baseline, detect_drops, self_similarity, DetectionParams, OccurrenceTable,
};
use semdrift_core::vocab::{build_vocabulary, NegativeSamplingTable, Vocabulary};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn text() -> impl Strategy<Value = String> {
    // Mix of letters, accented letters, joiners, digits, punctuation and line breaks.
    proptest::collection::vec(
        prop_oneof![
            "[a-zA-Z]{1,8}",
            "[àèéìòùÀÈ]{1,2}",
            Just("'".to_string()),
            Just("’".to_string()),
            Just("-".to_string()),
            Just(" ".to_string()),
            Just("\n".to_string()),
            "[0-9.,;:!?]{1,3}",
        ],
        0..40,
    )
    .prop_map(|parts| parts.concat())
}

proptest! {
    #[test]
    fn tokenize_is_idempotent(s in text()) {
        let once = tokenize(&s);
        let twice = tokenize(&once.join(" "));
        prop_assert_eq!(&once, &twice);
        for t in &once {
            prop_assert!(!t.is_empty());
            prop_assert_eq!(&tokenize(t), &vec![t.clone()]);
        }
    }

    #[test]
    fn bucketing_is_total_and_order_preserving(
        docs in proptest::collection::vec((1995i32..2012, text()), 0..30)
    ) {
        let cfg = TimeSpanConfig::new(2000, 2007, 2).unwrap();
        let documents: Vec<Document> =
            docs.iter().map(|(y, t)| Document::new(*y, t.clone())).collect();
        let b = bucket(documents.clone(), &cfg).unwrap();
        prop_assert_eq!(b.spans.len(), 4);
        prop_assert_eq!(b.documents, documents.len());

        // Stable sort by span reproduces the concatenation of the span corpora.
        let mut kept: Vec<(usize, Vec<String>)> = documents
            .iter()
            .filter_map(|d| cfg.span_of(d.year).map(|s| (s, d.sentences().collect::<Vec<_>>())))
            .flat_map(|(s, sentences)| sentences.into_iter().map(move |x| (s, x)))
            .collect();
        kept.sort_by_key(|(s, _)| *s);
        let expected: Vec<Vec<String>> = kept.into_iter().map(|(_, x)| x).collect();
        let got: Vec<Vec<String>> =
            b.spans.iter().flat_map(|s| s.sentences.iter().cloned()).collect();
        prop_assert_eq!(got, expected);
        let out = documents.iter().filter(|d| cfg.span_of(d.year).is_none()).count();
        prop_assert_eq!(b.out_of_range, out);
    }

    #[test]
    fn vocabulary_ignores_span_order(
        spans in proptest::collection::vec(text(), 2..6),
        seed in any::<u64>(),
        min_count in 1u64..4,
    ) {
        let cfg = TimeSpanConfig::new(2000, 2000 + spans.len() as i32 - 1, 1).unwrap();
        let docs = |order: &[usize]| -> Vec<Document> {
            order.iter().map(|&i| Document::new(2000 + i as i32, spans[i].clone())).collect()
        };
        let forward: Vec<usize> = (0..spans.len()).collect();
        let mut shuffled = forward.clone();
        shuffled.shuffle(&mut rng::seeded(seed));
        let a = bucket(docs(&forward), &cfg).unwrap();
        let b = bucket(docs(&shuffled), &cfg).unwrap();
        let mut permuted = a.spans.clone();
        permuted.shuffle(&mut rng::seeded(seed ^ 1));
        let va = build_vocabulary(&a.spans, min_count);
        let vb = build_vocabulary(&b.spans, min_count);
        let vp = build_vocabulary(&permuted, min_count);
        match (va, vb, vp) {
            (Ok(va), Ok(vb), Ok(vp)) => {
                prop_assert_eq!(va.words(), vb.words());
                prop_assert_eq!(va.counts(), vb.counts());
                prop_assert_eq!(va.words(), vp.words());
                prop_assert_eq!(va.counts(), vp.counts());
            }
            (Err(_), Err(_), Err(_)) => {}
            _ => prop_assert!(false, "vocabulary build disagreed on success"),
        }
    }
}

/// Three random spans over a 40-word vocabulary with a planted perturbation of word 0.
fn random_model(seed: u64) -> (Vec<EmbeddingSpace>, Vocabulary, OccurrenceTable) {
    let words = (0..40).map(|i| (format!("w{i:02}"), 100 - i as u64));
    let vocab = Vocabulary::from_counts(words, 1).unwrap();
    let base = EmbeddingSpace::init_random(40, 12, seed).unwrap();
    let mut spaces = Vec::new();
    for t in 0..3u64 {
        let noise = EmbeddingSpace::init_random(40, 12, seed ^ (t + 1)).unwrap();
        let amount = |id: usize| if id == 0 && t == 2 { 2.0 } else { 0.1 };
        let input: Vec<f32> = base
            .input()
            .iter()
            .zip(noise.input())
            .enumerate()
            .map(|(i, (b, n))| b + amount(i / 12) * n)
            .collect();
        let mut s = EmbeddingSpace::from_parts(40, 12, input, vec![0.0; 480]).unwrap();
        s.span_index = t as usize;
        spaces.push(s);
    }
    let occ = OccurrenceTable::from_rows(vec![vec![50; 40]; 3]).unwrap();
    (spaces, vocab, occ)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reports_are_scale_invariant(seed in any::<u64>(), exp in -8i32..8, factor in 0.01f32..100.0) {
        let (spaces, vocab, occ) = random_model(seed);
        let params = DetectionParams::default();
        let report = |spaces: &[EmbeddingSpace]| {
            let band = baseline(spaces, &vocab, 40, 7).unwrap();
            let s = self_similarity(spaces, &vocab, &occ, "w00").unwrap();
            detect_drops(&s, &band, &params).unwrap()
        };
        let reference = report(&spaces);

        // A power of two is exact in floating point, so everything matches bit for bit.
        let mut pow2 = spaces.clone();
        pow2.iter_mut().for_each(|s| s.scale(2f32.powi(exp)));
        prop_assert_eq!(&report(&pow2), &reference);

        let mut scaled = spaces.clone();
        scaled.iter_mut().for_each(|s| s.scale(factor));
        let other = report(&scaled);
        prop_assert_eq!(other.flagged_transitions(), reference.flagged_transitions());
        for (a, b) in other.series.values.iter().zip(&reference.series.values) {
            prop_assert!((a.unwrap() - b.unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn census_band_is_the_population_mean(seed in any::<u64>(), sample_seed in any::<u64>()) {
        let (spaces, vocab, occ) = random_model(seed);
        let band = baseline(spaces.as_slice(), &vocab, 40, sample_seed).unwrap();
        for t in 0..2 {
            let values: Vec<f64> = vocab
                .words()
                .iter()
                .map(|w| self_similarity(spaces.as_slice(), &vocab, &occ, w).unwrap().values[t].unwrap())
                .collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            prop_assert!((band.means[t].unwrap() - mean).abs() < 1e-12);
            prop_assert_eq!(band.n_effective[t], 40);
        }
        // Every census is the same set of words, whatever the seed.
        let other = baseline(spaces.as_slice(), &vocab, 40, sample_seed ^ 0xff).unwrap();
        prop_assert_eq!(&other.means, &band.means);
        prop_assert_eq!(&other.stds, &band.stds);
    }
}

#[test]
fn negative_sampling_passes_chi_square() {
    let counts: Vec<u64> = (0..100u64).map(|i| 1 + (i * 37) % 500).collect();
    let table = NegativeSamplingTable::from_counts(&counts, 0.75).unwrap();
    let norm: f64 = counts.iter().map(|&c| (c as f64).powf(0.75)).sum();
    let mut observed = vec![0u64; 100];
    let mut r = rng::seeded(7);
    let draws = 1_000_000;
    for _ in 0..draws {
        observed[table.sample(&mut r) as usize] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&observed)
        .map(|(&c, &o)| {
            let e = draws as f64 * (c as f64).powf(0.75) / norm;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let p = 1.0 - ChiSquared::new(99.0).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 {chi2} p {p}");
}

#[test]
fn span_corpus_tracks_tokens() {
    let s = SpanCorpus::new(3, vec![vec![0, 1, 1], vec![], vec![2]]);
    assert_eq!(s.token_count, 4);
    assert_eq!(s.occurrences(4), vec![1, 2, 1, 0]);
}

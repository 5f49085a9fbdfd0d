use semdrift_core::chrono::{
    chain_train, chain_train_in_memory, init_seed, span_seed, ChainDirection, ChainOptions,
};
use semdrift_core::corpus::{bucket, Document, SpanCorpus, TimeSpanConfig};
use semdrift_core::sgns::{EmbeddingSpace, SequentialTrainer, TrainingConfig};
use semdrift_core::shift::{baseline, self_similarity, OccurrenceTable};
use semdrift_core::vocab::{build_vocabulary, NegativeSamplingTable, Vocabulary};

const FILLER: [&str; 16] = [
    "apple", "brick", "cloud", "delta", "ember", "frost", "grain", "harbor", "island", "jungle",
    "kettle", "lantern", "meadow", "nectar", "orbit", "pepper",
];

/// Four two-year spans; "novel" only occurs in the last one.
fn corpus() -> (Vec<SpanCorpus>, Vocabulary) {
    let cfg = TimeSpanConfig::new(2000, 2007, 2).unwrap();
    let mut docs = Vec::new();
    for year in 2000..=2007 {
        let mut text = String::new();
        for i in 0..40 {
            text.push_str(&format!(
                "the cat sat on the mat {} dog ran\nsome words repeat here and there {}\n",
                ["red", "blue", "green"][i % 3],
                ["today", "again"][(i + year as usize) % 2],
            ));
        }
        for w in FILLER {
            text.push_str(&format!("{w} {w} the {w} mat\n"));
        }
        if year >= 2006 {
            text.push_str("a novel idea\n".repeat(10).as_str());
        }
        docs.push(Document::new(year, text));
    }
    let b = bucket(docs, &cfg).unwrap();
    let vocab = build_vocabulary(&b.spans, 5).unwrap();
    let spans = b.spans.iter().map(|s| vocab.encode_span(s)).collect();
    (spans, vocab)
}

fn cfg() -> TrainingConfig {
    TrainingConfig {
        dimension: 16,
        epochs: 3,
        ..TrainingConfig::default()
    }
}

#[test]
fn reverse_order_and_late_word_rows() {
    let (spans, vocab) = corpus();
    let table = NegativeSamplingTable::new(&vocab, 0.75).unwrap();
    let model = chain_train(&spans, &vocab, &table, &cfg(), ChainDirection::Reverse).unwrap();
    assert_eq!(model.training_order, vec![3, 2, 1, 0]);
    let novel = vocab.id("novel").unwrap();
    let last = model.spaces[3].input_row(novel);
    for space in &model.spaces[..3] {
        assert_eq!(space.input_row(novel), last);
    }
    // the word was trained in the last span, so it differs from the random start
    let init = EmbeddingSpace::init_random(vocab.len(), 16, init_seed(1, ChainDirection::Reverse))
        .unwrap();
    assert_ne!(init.input_row(novel), last);
}

#[test]
fn null_chain_gives_unit_self_similarity() {
    let (spans, vocab) = corpus();
    let table = NegativeSamplingTable::new(&vocab, 0.75).unwrap();
    let mut epochs = vec![0; spans.len()];
    *epochs.last_mut().unwrap() = 3;
    let options = ChainOptions {
        direction: ChainDirection::Reverse,
        span_epochs: Some(epochs),
    };
    let model =
        chain_train_in_memory(&spans, &vocab, &table, &cfg(), &options, &SequentialTrainer).unwrap();
    for space in &model.spaces[..3] {
        assert_eq!(space.input(), model.spaces[3].input());
        assert_eq!(space.output(), model.spaces[3].output());
    }
    let occ = OccurrenceTable::from_spans(&spans, vocab.len());
    for word in vocab.words() {
        let s = self_similarity(&model, &vocab, &occ, word).unwrap();
        assert!(s.values.iter().all(|v| *v == Some(1.0)), "{word}: {:?}", s.values);
    }
    let band = baseline(&model, &vocab, vocab.len(), 4).unwrap();
    assert!(band.means.iter().all(|m| *m == Some(1.0)));
    assert!(band.stds.iter().all(|s| *s == Some(0.0)));
}

#[test]
fn zero_epochs_everywhere_copies_the_init() {
    let (spans, vocab) = corpus();
    let table = NegativeSamplingTable::new(&vocab, 0.75).unwrap();
    let zero = TrainingConfig { epochs: 0, ..cfg() };
    for direction in [ChainDirection::Reverse, ChainDirection::Forward] {
        let model = chain_train(&spans, &vocab, &table, &zero, direction).unwrap();
        let init =
            EmbeddingSpace::init_random(vocab.len(), 16, init_seed(zero.seed, direction)).unwrap();
        for space in &model.spaces {
            assert_eq!(space.input(), init.input());
            assert_eq!(space.output(), init.output());
        }
    }
}

#[test]
fn directions_use_distinct_streams() {
    let mut seeds = std::collections::HashSet::new();
    for direction in [ChainDirection::Reverse, ChainDirection::Forward] {
        assert!(seeds.insert(init_seed(42, direction)));
        for span in 0..64 {
            assert!(seeds.insert(span_seed(42, span, direction)));
        }
    }
    let (spans, vocab) = corpus();
    let table = NegativeSamplingTable::new(&vocab, 0.75).unwrap();
    let fwd = chain_train(&spans, &vocab, &table, &cfg(), ChainDirection::Forward).unwrap();
    assert_eq!(fwd.training_order, vec![0, 1, 2, 3]);
    let rev = chain_train(&spans, &vocab, &table, &cfg(), ChainDirection::Reverse).unwrap();
    assert_ne!(fwd.spaces[0].input(), rev.spaces[0].input());
    let again = chain_train(&spans, &vocab, &table, &cfg(), ChainDirection::Forward).unwrap();
    assert_eq!(fwd, again);
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semdrift_core::corpus::SpanCorpus;
use semdrift_core::sgns::{train_span, EmbeddingSpace, LrSchedule, TrainingConfig};
use semdrift_core::shift::cosine;
use semdrift_core::vocab::{NegativeSamplingTable, VocabCounter, Vocabulary};

fn vocab_of(sentences: &[Vec<&str>]) -> Vocabulary {
    let mut c = VocabCounter::new();
    for s in sentences {
        for w in s {
            c.add(w);
        }
    }
    c.finish(1).unwrap()
}

fn encode(vocab: &Vocabulary, sentences: &[Vec<&str>]) -> SpanCorpus {
    SpanCorpus::new(
        0,
        sentences
            .iter()
            .map(|s| vocab.encode_sentence(s.iter().copied()))
            .collect(),
    )
}

fn cos(a: &[f32], b: &[f32]) -> f64 {
    cosine(a, b).unwrap().unwrap()
}

#[test]
fn two_word_corpus_converges_monotonically() {
    let sentences = vec![vec!["a", "b"]; 1000];
    let vocab = vocab_of(&sentences);
    let table = NegativeSamplingTable::new(&vocab, 0.75).unwrap();
    let corpus = encode(&vocab, &sentences);
    let cfg = TrainingConfig {
        dimension: 10,
        epochs: 1,
        // With two words, every extra negative is often the context itself, which caps σ(u·v).
        negatives: 1,
        learning_rate: 0.0002,
        lr_schedule: LrSchedule::Constant,
        ..TrainingConfig::default()
    };
    let (a, b) = (vocab.id("a").unwrap(), vocab.id("b").unwrap());
    // A random W_out so the run starts far from alignment.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut random = || (0..20).map(|_| rng.gen_range(-0.05f32..0.05)).collect::<Vec<_>>();
    let mut space = EmbeddingSpace::from_parts(2, 10, random(), random()).unwrap();
    let mut last = cos(space.input_row(a), space.output_row(b));
    for epoch in 0..50 {
        let mut c = cfg.clone();
        c.seed = epoch;
        space = train_span(&corpus, &vocab, &table, &space, &c).unwrap();
        let now = cos(space.input_row(a), space.output_row(b));
        if now > 0.9 {
            return;
        }
        assert!(now > last, "epoch {epoch}: {now} after {last}");
        last = now;
    }
    panic!("cosine stalled at {last}");
}

#[test]
fn disjoint_topics_separate() {
    let left: Vec<String> = (0..10).map(|i| format!("left{}", (b'a' + i) as char)).collect();
    let right: Vec<String> = (0..10).map(|i| format!("right{}", (b'a' + i) as char)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sentences: Vec<Vec<&str>> = (0..4000)
        .map(|i| {
            let pool = if i % 2 == 0 { &left } else { &right };
            (0..8).map(|_| pool[rng.gen_range(0..10)].as_str()).collect()
        })
        .collect();
    let vocab = vocab_of(&sentences);
    let table = NegativeSamplingTable::new(&vocab, 0.75).unwrap();
    let corpus = encode(&vocab, &sentences);
    let cfg = TrainingConfig {
        dimension: 20,
        epochs: 3,
        learning_rate: 0.025,
        ..TrainingConfig::default()
    };
    let init = EmbeddingSpace::init_random(vocab.len(), 20, 3).unwrap();
    let space = train_span(&corpus, &vocab, &table, &init, &cfg).unwrap();

    let ids = |words: &[String]| -> Vec<u32> { words.iter().map(|w| vocab.id(w).unwrap()).collect() };
    let (l, r) = (ids(&left), ids(&right));
    let mean = |pairs: Vec<(u32, u32)>| {
        let n = pairs.len() as f64;
        pairs
            .into_iter()
            .map(|(x, y)| cos(space.input_row(x), space.input_row(y)))
            .sum::<f64>()
            / n
    };
    let mut within = Vec::new();
    for g in [&l, &r] {
        for (i, &x) in g.iter().enumerate() {
            for &y in &g[i + 1..] {
                within.push((x, y));
            }
        }
    }
    let across: Vec<(u32, u32)> = l.iter().flat_map(|&x| r.iter().map(move |&y| (x, y))).collect();
    let (w, a) = (mean(within), mean(across));
    assert!(w > a, "within {w} across {a}");
    assert!(w - a > 0.2, "within {w} across {a}");
}

#[test]
fn init_is_untouched_and_absent_words_keep_input_rows() {
    let sentences = vec![vec!["x", "y", "z", "x", "y"]; 200];
    let mut counter = VocabCounter::new();
    for s in &sentences {
        for w in s {
            counter.add(w);
        }
    }
    counter.add_n("absent", 10);
    let vocab = counter.finish(1).unwrap();
    let table = NegativeSamplingTable::new(&vocab, 0.75).unwrap();
    let corpus = encode(&vocab, &sentences);
    let cfg = TrainingConfig {
        dimension: 8,
        epochs: 2,
        ..TrainingConfig::default()
    };
    let init = EmbeddingSpace::init_random(vocab.len(), 8, 5).unwrap();
    let snapshot = init.clone();
    let trained = train_span(&corpus, &vocab, &table, &init, &cfg).unwrap();
    assert_eq!(init, snapshot);
    let absent = vocab.id("absent").unwrap();
    assert_eq!(trained.input_row(absent), init.input_row(absent));
    assert_ne!(trained.input_row(vocab.id("x").unwrap()), init.input_row(vocab.id("x").unwrap()));

    let zero = TrainingConfig { epochs: 0, ..cfg.clone() };
    let same = train_span(&corpus, &vocab, &table, &init, &zero).unwrap();
    assert_eq!(same.input(), init.input());
    assert_eq!(same.output(), init.output());

    let again = train_span(&corpus, &vocab, &table, &init, &cfg).unwrap();
    assert_eq!(again, trained);
}

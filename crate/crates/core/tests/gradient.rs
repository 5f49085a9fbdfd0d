//! Analytic SGNS gradients against an independent `f64` loss and central differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semdrift_core::sgns::{pair_gradient, sgns_pair_update, EmbeddingSpace};

const EPS: f64 = 1e-5;

fn ln_sigmoid(x: f64) -> f64 {
    // Written independently of the library: log σ(x) = -log(1 + e^{-x}).
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pair loss with all vectors in `f64`; `rows[0]` is the context.
fn loss(v: &[f64], rows: &[Vec<f64>]) -> f64 {
    let mut l = -ln_sigmoid(dot(v, &rows[0]));
    for n in &rows[1..] {
        l -= ln_sigmoid(-dot(v, n));
    }
    l
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(1e-6);
    (analytic - numeric).abs() / scale
}

/// Largest relative error over every coordinate of one random configuration.
fn check_configuration(rng: &mut ChaCha8Rng, d: usize) -> f64 {
    let scale = rng.gen_range(0.1f32..1.5);
    let k = rng.gen_range(0..=6);
    let mut vec32 = || -> Vec<f32> { (0..d).map(|_| rng.gen_range(-scale..scale)).collect() };
    let center = vec32();
    let context = vec32();
    let negatives: Vec<Vec<f32>> = (0..k).map(|_| vec32()).collect();
    let neg_refs: Vec<&[f32]> = negatives.iter().map(|n| n.as_slice()).collect();
    let g = pair_gradient(&center, &context, &neg_refs);

    let to64 = |x: &[f32]| x.iter().map(|&v| f64::from(v)).collect::<Vec<f64>>();
    let v = to64(&center);
    let rows: Vec<Vec<f64>> = std::iter::once(to64(&context))
        .chain(negatives.iter().map(|n| to64(n)))
        .collect();
    assert!((g.loss - loss(&v, &rows)).abs() < 1e-9);

    let mut worst = 0.0f64;
    for i in 0..d {
        let mut plus = v.clone();
        let mut minus = v.clone();
        plus[i] += EPS;
        minus[i] -= EPS;
        let numeric = (loss(&plus, &rows) - loss(&minus, &rows)) / (2.0 * EPS);
        worst = worst.max(rel_err(g.center[i], numeric));
    }
    for (r, analytic) in g.targets.iter().enumerate() {
        for i in 0..d {
            let mut plus = rows.clone();
            let mut minus = rows.clone();
            plus[r][i] += EPS;
            minus[r][i] -= EPS;
            let numeric = (loss(&v, &plus) - loss(&v, &minus)) / (2.0 * EPS);
            worst = worst.max(rel_err(analytic[i], numeric));
        }
    }
    worst
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let worst = (0..1000)
        .map(|_| check_configuration(&mut rng, 10))
        .fold(0.0f64, f64::max);
    assert!(worst < 1e-4, "max relative error {worst:e}");
}

#[test]
fn pair_update_is_a_gradient_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (n, d) = (6, 8);
    let input: Vec<f32> = (0..n * d).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let output: Vec<f32> = (0..n * d).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let mut space = EmbeddingSpace::from_parts(n, d, input, output).unwrap();
    let before = space.clone();
    let lr = 0.05f32;
    let (center, context, negatives) = (1u32, 2u32, [3u32, 4]);

    let g = pair_gradient(
        before.input_row(center),
        before.output_row(context),
        &[before.output_row(3), before.output_row(4)],
    );
    sgns_pair_update(&mut space, center, context, &negatives, lr).unwrap();

    let lr = f64::from(lr);
    let expect = |old: &[f32], grad: &[f64]| -> Vec<f64> {
        old.iter().zip(grad).map(|(&o, &g)| f64::from(o) - lr * g).collect()
    };
    let close = |got: &[f32], want: &[f64]| {
        for (a, b) in got.iter().zip(want) {
            assert!((f64::from(*a) - b).abs() < 1e-6, "{a} vs {b}");
        }
    };
    close(space.input_row(center), &expect(before.input_row(center), &g.center));
    for (row, grad) in [context, 3, 4].iter().zip(&g.targets) {
        close(space.output_row(*row), &expect(before.output_row(*row), grad));
    }
    for untouched in [0u32, 5] {
        assert_eq!(space.input_row(untouched), before.input_row(untouched));
        assert_eq!(space.output_row(untouched), before.output_row(untouched));
    }
}

#[test]
fn zero_center_leaves_output_row_unchanged() {
    let d = 4;
    let mut input = vec![0.3f32; 2 * d];
    input[..d].fill(0.0);
    let output = vec![0.7f32; 2 * d];
    let mut space = EmbeddingSpace::from_parts(2, d, input, output).unwrap();
    sgns_pair_update(&mut space, 0, 1, &[], 0.1).unwrap();
    assert_eq!(space.output_row(1), &[0.7f32; 4]);
    // the center itself moves by η·0.5·u
    for &x in space.input_row(0) {
        assert!((x - 0.035).abs() < 1e-7);
    }
}

/// Scalar model of one positive pair: with `a = |v|²`, `b = |u|²`, `c = u·v`, an SGD
/// step with `g = η(1 - σ(c))` maps `v ← v + g u`, `u ← u + g v`.
fn simulate(mut a: f64, mut b: f64, mut c: f64, lr: f64, steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let g = lr * (1.0 - 1.0 / (1.0 + (-c).exp()));
        let (a2, b2, c2) = (
            a + 2.0 * g * c + g * g * b,
            b + 2.0 * g * c + g * g * a,
            c + g * (a + b) + g * g * c,
        );
        a = a2;
        b = b2;
        c = c2;
        out.push(1.0 / (1.0 + (-c).exp()));
    }
    out
}

#[test]
fn single_pair_dynamics_drive_score_to_one() {
    let d = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let input: Vec<f32> = (0..2 * d).map(|_| rng.gen_range(-0.05..0.05)).collect();
    let output: Vec<f32> = (0..2 * d).map(|_| rng.gen_range(-0.05..0.05)).collect();
    let mut space = EmbeddingSpace::from_parts(2, d, input, output).unwrap();
    let lr = 0.1;
    let v0: Vec<f64> = space.input_row(0).iter().map(|&x| f64::from(x)).collect();
    let u0: Vec<f64> = space.output_row(1).iter().map(|&x| f64::from(x)).collect();
    let predicted = simulate(dot(&v0, &v0), dot(&u0, &u0), dot(&v0, &u0), lr, 2000);

    let mut last = 0.0;
    for (step, want) in predicted.iter().enumerate() {
        sgns_pair_update(&mut space, 0, 1, &[], lr as f32).unwrap();
        let v: Vec<f64> = space.input_row(0).iter().map(|&x| f64::from(x)).collect();
        let u: Vec<f64> = space.output_row(1).iter().map(|&x| f64::from(x)).collect();
        let s = 1.0 / (1.0 + (-dot(&v, &u)).exp());
        assert!((s - want).abs() < 1e-4, "step {step}: {s} vs {want}");
        assert!(s >= last, "score fell at step {step}");
        last = s;
    }
    assert!(last > 0.95, "final score {last}");
}

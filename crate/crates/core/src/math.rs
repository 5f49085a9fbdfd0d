/// Logits are clamped to this magnitude before the exponential.
pub(crate) const LOGIT_CLAMP: f64 = 30.0;

#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum()
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    let x = x.clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
    1.0 / (1.0 + libm::exp(-x))
}

#[inline]
pub(crate) fn ln_sigmoid(x: f64) -> f64 {
    // log σ(x) = -log(1 + e^{-x}), evaluated on the clamped logit
    let x = x.clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
    -libm::log1p(libm::exp(-x))
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Median of a non-empty slice; the slice is reordered.
pub(crate) fn median_in_place(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

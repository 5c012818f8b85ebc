//! Small numeric helpers: finite differences and log-sum-exp.

/// Default central-difference step at `t`: `max(1, |t|) · ε^{1/3}`.
pub fn default_step(t: f64) -> f64 {
    t.abs().max(1.0) * f64::EPSILON.cbrt()
}

/// Central difference of a vector-valued map with one Richardson refinement.
pub fn central_difference<F>(f: F, t: f64, h: f64) -> Vec<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    let coarse = symmetric_quotient(&f, t, h);
    let fine = symmetric_quotient(&f, t, 0.5 * h);
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

/// Scalar version of [`central_difference`].
pub fn central_difference_scalar<F>(f: F, t: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    central_difference(|s| vec![f(s)], t, h)[0]
}

fn symmetric_quotient<F>(f: &F, t: f64, h: f64) -> Vec<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    let plus = f(t + h);
    let minus = f(t - h);
    plus.iter()
        .zip(&minus)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect()
}

/// `log Σ w_i e^{a_i}` over the entries with `w_i > 0`, shifted by the max exponent.
///
/// Returns `-inf` when no weight is positive.
pub fn log_weighted_sum_exp(weights: &[f64], exponents: &[f64]) -> f64 {
    let max = weights
        .iter()
        .zip(exponents)
        .filter(|(w, _)| **w > 0.0)
        .map(|(_, a)| *a)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = weights
        .iter()
        .zip(exponents)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, a)| w * (a - max).exp())
        .sum();
    max + sum.ln()
}

/// Max-abs distance between two equal-length vectors.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

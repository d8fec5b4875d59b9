use rand::Rng;

use super::InferenceError;

/// `ln Σ exp(xs)`, shifted by the maximum to avoid overflow and underflow.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln (Σ exp(xs) / n)`.
pub fn log_mean_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + (xs.iter().map(|x| (x - max).exp()).sum::<f64>() / xs.len() as f64).ln()
}

/// `(Σ w)² / Σ w²` for the weights `exp(log_weights)`.
pub fn effective_sample_size(log_weights: &[f64]) -> f64 {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return 0.0;
    }
    let (s, s2) = log_weights.iter().fold((0.0, 0.0), |(s, s2), lw| {
        let w = (lw - max).exp();
        (s + w, s2 + w * w)
    });
    s * s / s2
}

/// Systematic resampling: `n` ancestor indices, drawn with a single uniform
/// offset, each index appearing about `n · w_i / Σ w` times.
pub fn resample_systematic<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> Result<Vec<usize>, InferenceError> {
    let n = log_weights.len();
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if n == 0 || max == f64::NEG_INFINITY {
        return Err(InferenceError::DegenerateWeights);
    }
    let weights: Vec<f64> = log_weights.iter().map(|lw| (lw - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let step = total / n as f64;
    let mut u = rng.random::<f64>() * step;
    let mut out = Vec::with_capacity(n);
    let mut cum = weights[0];
    let mut i = 0;
    for _ in 0..n {
        while u >= cum && i + 1 < n {
            i += 1;
            cum += weights[i];
        }
        out.push(i);
        u += step;
    }
    Ok(out)
}

use crate::interp::{drive, Counters, Sampler};

use super::{log_mean_exp, output, stream_rng, Diagnostics, InferenceError, InferenceResult, Model, WeightedSample};

/// Likelihood weighting: `n` independent prior runs, each weighted by the
/// product of its weight factors. Weight suspensions are resumed at once.
pub fn run_lw(model: &Model, n: usize, seed: u64) -> Result<InferenceResult, InferenceError> {
    if n == 0 {
        return Err(InferenceError::InvalidArgument(
            "likelihood weighting needs at least one sample".into(),
        ));
    }
    let mut counters = Counters::default();
    let mut samples = Vec::with_capacity(n);
    for index in 0..n {
        let mut rng = stream_rng(seed, index as u64);
        let mut fx = Sampler::new(&mut rng);
        let out =
            drive(&model.target, &mut fx, &mut counters).map_err(|source| InferenceError::Eval { index, source })?;
        samples.push(WeightedSample {
            value: output(&out.value, index)?,
            log_weight: fx.tally.log_likelihood,
        });
    }
    let lws: Vec<f64> = samples.iter().map(|s| s.log_weight).collect();
    Ok(InferenceResult {
        samples,
        log_norm_const: Some(log_mean_exp(&lws)),
        diagnostics: Diagnostics {
            counters,
            ..Diagnostics::default()
        },
    })
}

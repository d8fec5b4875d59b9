use rand_chacha::ChaCha8Rng;

use crate::interp::{ln_weight, resume, start, Counters, EvalError, Sampler, Step, TValue};
use crate::kernel::Intrinsic;

use super::{
    effective_sample_size, log_mean_exp, output, resample_systematic, stream_rng, Algorithm, Diagnostics,
    InferenceError, InferenceResult, Model, WeightedSample,
};

#[derive(Clone)]
enum Particle<'t> {
    Suspended(TValue<'t>),
    Finished(TValue<'t>),
}

/// Runs a particle until its next weight suspension or its end. Returns the
/// particle and the log weight it gained on the way.
fn advance<'t>(
    mut step: Step<'t>,
    rng: &mut ChaCha8Rng,
    counters: &mut Counters,
) -> Result<(Particle<'t>, f64), EvalError> {
    let mut fx = Sampler::new(rng);
    loop {
        step = match step {
            Step::Done(v) => return Ok((Particle::Finished(v), fx.tally.log_likelihood)),
            Step::Weight { weight, k, .. } => {
                return Ok((Particle::Suspended(k), fx.tally.log_likelihood + ln_weight(weight)));
            }
            Step::Assume { label, dist, k } => {
                use crate::interp::Effects;
                let v = fx.assume(&dist).map_err(|e| EvalError::from(e).at(&label))?;
                resume(&k, TValue::Const(v), &mut fx, counters)?
            }
        }
    }
}

/// Bootstrap particle filter: particles run to their next weight suspension,
/// are resampled systematically, and resume. Particles that have finished
/// keep weight one at later barriers.
pub fn run_bpf(model: &Model, n: usize, seed: u64) -> Result<InferenceResult, InferenceError> {
    if n < 2 {
        return Err(InferenceError::InvalidArgument(
            "the particle filter needs at least two particles".into(),
        ));
    }
    if !model.suspends_at_weight() {
        return Err(InferenceError::Unsupported {
            algorithm: Algorithm::Bpf,
            construct: "weight",
            mode: model.mode,
            cfg: model.cfg,
        });
    }
    let mut counters = Counters::default();
    let mut resample_rng = stream_rng(seed, u64::MAX);
    let mut particles = Vec::with_capacity(n);
    for index in 0..n {
        let mut rng = stream_rng(seed, index as u64);
        let mut init = Sampler::new(&mut rng);
        let first = start(&model.target, &mut init, &mut counters);
        let direct = init.tally.log_likelihood;
        let (p, lw) = first
            .and_then(|s| advance(s, &mut rng, &mut counters))
            .map_err(|source| InferenceError::Eval { index, source })?;
        particles.push((p, lw + direct));
    }

    let mut log_z = 0.0;
    let mut diagnostics = Diagnostics::default();
    let mut step = 0usize;
    loop {
        let lws: Vec<f64> = particles.iter().map(|(_, lw)| *lw).collect();
        let increment = log_mean_exp(&lws);
        if increment == f64::NEG_INFINITY {
            return Err(InferenceError::AllZeroWeight { step });
        }
        log_z += increment;
        if particles.iter().all(|(p, _)| matches!(p, Particle::Finished(_))) {
            let samples = particles
                .iter()
                .enumerate()
                .map(|(index, (p, lw))| {
                    let Particle::Finished(v) = p else { unreachable!() };
                    Ok(WeightedSample {
                        value: output(v, index)?,
                        log_weight: *lw,
                    })
                })
                .collect::<Result<Vec<_>, InferenceError>>()?;
            diagnostics.counters = counters;
            diagnostics.resampling_steps = step;
            return Ok(InferenceResult {
                samples,
                log_norm_const: Some(log_z),
                diagnostics,
            });
        }
        diagnostics.ess.push(effective_sample_size(&lws));
        let ancestors = resample_systematic(&lws, &mut resample_rng)?;
        step += 1;
        let mut next = Vec::with_capacity(n);
        for (index, &a) in ancestors.iter().enumerate() {
            next.push(match &particles[a].0 {
                Particle::Finished(v) => (Particle::Finished(v.clone()), 0.0),
                Particle::Suspended(k) => {
                    let mut rng = stream_rng(seed, ((step as u64) << 32) | index as u64);
                    let mut fx = Sampler::new(&mut rng);
                    let resumed = resume(k, TValue::Const(Intrinsic::Unit), &mut fx, &mut counters);
                    let direct = fx.tally.log_likelihood;
                    let (p, lw) = resumed
                        .and_then(|s| advance(s, &mut rng, &mut counters))
                        .map_err(|source| InferenceError::Eval { index, source })?;
                    (p, lw + direct)
                }
            });
        }
        particles = next;
    }
}

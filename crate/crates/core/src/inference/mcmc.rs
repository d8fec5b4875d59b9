use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::interp::{ln_weight, resume, start, Counters, Effects, ErrorKind, EvalError, Step, TValue};
use crate::kernel::{Dist, Intrinsic};

use super::{output, stream_rng, Algorithm, Diagnostics, InferenceError, InferenceResult, Model, WeightedSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McmcOptions {
    /// Iterations discarded before samples are kept.
    pub burn_in: usize,
    /// Attempts at finding an initial trace with positive weight.
    pub init_attempts: usize,
}

impl Default for McmcOptions {
    fn default() -> Self {
        McmcOptions {
            burn_in: 1000,
            init_attempts: 100,
        }
    }
}

/// One `assume` in a trace.
#[derive(Clone)]
struct Site<'t> {
    value: Intrinsic,
    ln_density: f64,
    /// Where to restart to redraw this site: the suspended continuation and
    /// the running totals just before the draw. Absent in direct style.
    resume: Option<Resume<'t>>,
}

#[derive(Clone)]
struct Resume<'t> {
    k: TValue<'t>,
    dist: Dist,
    log_prior: f64,
    log_likelihood: f64,
}

#[derive(Clone)]
struct State<'t> {
    sites: Vec<Site<'t>>,
    log_prior: f64,
    log_likelihood: f64,
    value: TValue<'t>,
}

impl State<'_> {
    fn log_joint(&self) -> f64 {
        self.log_prior + self.log_likelihood
    }
}

/// Effect handler for one proposal: replays sites before `redraw`, draws a
/// fresh value at `redraw`, and reuses old values at later positions when
/// they have positive density.
struct Proposal<'o, 't> {
    old: &'o [Site<'t>],
    redraw: usize,
    rng: &'o mut ChaCha8Rng,
    sites: Vec<Site<'t>>,
    log_prior: f64,
    log_likelihood: f64,
    /// Log density of the freshly drawn values, the redrawn site included.
    fresh: f64,
    /// Which old sites after `redraw` the proposal kept.
    reused: Vec<bool>,
    pending: Option<Resume<'t>>,
}

impl Effects for Proposal<'_, '_> {
    fn assume(&mut self, dist: &Dist) -> Result<Intrinsic, ErrorKind> {
        let i = self.sites.len();
        let old = self.old.get(i);
        let (value, lp, fresh) = if i < self.redraw {
            let v = old.expect("prefix is replayed from the current trace").value.clone();
            let lp = dist.ln_density(&v)?;
            (v, lp, false)
        } else if let Some(lp) = old
            .filter(|_| i > self.redraw)
            .and_then(|s| dist.ln_density(&s.value).ok().filter(|lp| lp.is_finite()))
        {
            self.reused[i] = true;
            (old.unwrap().value.clone(), lp, false)
        } else {
            let v = dist.sample(self.rng);
            let lp = dist.ln_density(&v)?;
            (v, lp, true)
        };
        if fresh {
            self.fresh += lp;
        }
        self.log_prior += lp;
        self.sites.push(Site {
            value: value.clone(),
            ln_density: lp,
            resume: self.pending.take(),
        });
        Ok(value)
    }

    fn weight(&mut self, w: f64) {
        self.log_likelihood += ln_weight(w);
    }
}

/// Runs a proposal to completion, starting from `step`.
fn finish<'t>(mut step: Step<'t>, fx: &mut Proposal<'_, 't>, counters: &mut Counters) -> Result<TValue<'t>, EvalError> {
    loop {
        step = match step {
            Step::Done(v) => return Ok(v),
            Step::Assume { label, dist, k } => {
                fx.pending = Some(Resume {
                    k: k.clone(),
                    dist,
                    log_prior: fx.log_prior,
                    log_likelihood: fx.log_likelihood,
                });
                let v = fx.assume(&dist).map_err(|e| EvalError::from(e).at(&label))?;
                resume(&k, TValue::Const(v), fx, counters)?
            }
            Step::Weight { weight, k, .. } => {
                fx.weight(weight);
                resume(&k, TValue::Const(Intrinsic::Unit), fx, counters)?
            }
        }
    }
}

/// Proposes a new state by redrawing site `redraw` of `current`. Returns
/// the proposal and the log of the proposal-density correction
/// `ln q(current | proposal) − ln q(proposal | current)`.
fn propose<'t>(
    model: &'t Model,
    current: &State<'t>,
    redraw: usize,
    rng: &mut ChaCha8Rng,
    counters: &mut Counters,
) -> Result<(State<'t>, f64), EvalError> {
    let restart = current.sites.get(redraw).and_then(|s| s.resume.clone());
    let mut fx = Proposal {
        old: &current.sites,
        redraw,
        rng,
        sites: Vec::new(),
        log_prior: 0.0,
        log_likelihood: 0.0,
        fresh: 0.0,
        reused: vec![false; current.sites.len()],
        pending: None,
    };
    let value = match restart {
        Some(r) => {
            fx.sites = current.sites[..redraw].to_vec();
            fx.log_prior = r.log_prior;
            fx.log_likelihood = r.log_likelihood;
            fx.pending = Some(r.clone());
            let v = fx.assume(&r.dist)?;
            let step = resume(&r.k, TValue::Const(v), &mut fx, counters)?;
            finish(step, &mut fx, counters)?
        }
        None => {
            let step = start(&model.target, &mut fx, counters)?;
            finish(step, &mut fx, counters)?
        }
    };
    // old values that the proposal did not keep, the redrawn one included
    let stale: f64 = current
        .sites
        .iter()
        .enumerate()
        .skip(redraw)
        .filter(|(i, _)| !fx.reused[*i])
        .map(|(_, s)| s.ln_density)
        .sum();
    let (n_old, n_new) = (current.sites.len() as f64, fx.sites.len() as f64);
    let correction = n_old.ln() - n_new.ln() + stale - fx.fresh;
    let state = State {
        sites: fx.sites,
        log_prior: fx.log_prior,
        log_likelihood: fx.log_likelihood,
        value,
    };
    Ok((state, correction))
}

fn initial<'t>(
    model: &'t Model,
    rng: &mut ChaCha8Rng,
    counters: &mut Counters,
    attempts: usize,
) -> Result<State<'t>, InferenceError> {
    for _ in 0..attempts {
        let empty = State {
            sites: Vec::new(),
            log_prior: 0.0,
            log_likelihood: 0.0,
            value: TValue::Const(Intrinsic::Unit),
        };
        let (state, _) =
            propose(model, &empty, 0, rng, counters).map_err(|source| InferenceError::Eval { index: 0, source })?;
        if state.log_joint() > f64::NEG_INFINITY {
            return Ok(state);
        }
    }
    Err(InferenceError::NoValidInitialTrace(attempts))
}

/// Single-site lightweight Metropolis-Hastings. Each iteration redraws one
/// uniformly chosen `assume` from its prior, re-runs the rest of the program
/// from that point, and reuses old values position by position.
pub fn run_mcmc(model: &Model, n: usize, seed: u64, opts: McmcOptions) -> Result<InferenceResult, InferenceError> {
    if n == 0 {
        return Err(InferenceError::InvalidArgument(
            "MCMC needs at least one iteration".into(),
        ));
    }
    if model.mode != crate::pipeline::CpsMode::None && !model.suspends_at_assume() {
        return Err(InferenceError::Unsupported {
            algorithm: Algorithm::Mcmc,
            construct: "assume",
            mode: model.mode,
            cfg: model.cfg,
        });
    }
    let mut rng = stream_rng(seed, 0);
    let mut counters = Counters::default();
    let mut current = initial(model, &mut rng, &mut counters, opts.init_attempts)?;
    let mut samples = Vec::with_capacity(n);
    let mut accepted = 0usize;
    for it in 0..opts.burn_in + n {
        if !current.sites.is_empty() {
            let j = rng.random_range(0..current.sites.len());
            let (proposal, correction) = propose(model, &current, j, &mut rng, &mut counters)
                .map_err(|source| InferenceError::Eval { index: it, source })?;
            let log_alpha = proposal.log_joint() - current.log_joint() + correction;
            let u: f64 = rng.random();
            if proposal.log_joint() > f64::NEG_INFINITY && u.ln() < log_alpha {
                current = proposal;
                accepted += 1;
            }
        } else {
            accepted += 1;
        }
        if it >= opts.burn_in {
            samples.push(WeightedSample {
                value: output(&current.value, it)?,
                log_weight: 0.0,
            });
        }
    }
    Ok(InferenceResult {
        samples,
        log_norm_const: None,
        diagnostics: Diagnostics {
            counters,
            acceptance_rate: Some(accepted as f64 / (opts.burn_in + n) as f64),
            ..Diagnostics::default()
        },
    })
}

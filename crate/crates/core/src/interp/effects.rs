use rand::Rng;

use crate::kernel::{Dist, Intrinsic};

use super::ErrorKind;

/// How `assume` obtains values and where `weight` factors go.
pub trait Effects {
    fn assume(&mut self, dist: &Dist) -> Result<Intrinsic, ErrorKind>;
    fn weight(&mut self, w: f64);
}

/// Natural log of a weight factor. Non-positive factors give `-inf`;
/// negative ones also log a warning since they have no probabilistic reading.
pub fn ln_weight(w: f64) -> f64 {
    if w > 0.0 {
        w.ln()
    } else {
        if w < 0.0 || w.is_nan() {
            log::warn!("weight applied to {w}; treating it as zero");
        }
        f64::NEG_INFINITY
    }
}

/// Running record of one execution: the values drawn, the log prior density
/// of those draws, and the log of the product of weight factors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tally {
    pub trace: Vec<Intrinsic>,
    pub log_prior: f64,
    pub log_likelihood: f64,
    pub weight_args: Vec<f64>,
}

impl Tally {
    /// The weight of the big-step semantics: prior densities times factors.
    pub fn log_weight(&self) -> f64 {
        self.log_prior + self.log_likelihood
    }

    pub fn record_assume(&mut self, dist: &Dist, value: Intrinsic) -> Result<Intrinsic, ErrorKind> {
        self.log_prior += dist.ln_density(&value)?;
        self.trace.push(value.clone());
        Ok(value)
    }

    pub fn record_weight(&mut self, w: f64) {
        self.weight_args.push(w);
        self.log_likelihood += ln_weight(w);
    }
}

/// Reads assumed values from a fixed trace.
#[derive(Debug)]
pub struct Replay<'a> {
    trace: &'a [Intrinsic],
    pub tally: Tally,
}

impl<'a> Replay<'a> {
    pub fn new(trace: &'a [Intrinsic]) -> Self {
        Replay {
            trace,
            tally: Tally::default(),
        }
    }
}

impl Effects for Replay<'_> {
    fn assume(&mut self, dist: &Dist) -> Result<Intrinsic, ErrorKind> {
        let i = self.tally.trace.len();
        let v = self.trace.get(i).ok_or(ErrorKind::TraceUnderrun(i))?.clone();
        self.tally.record_assume(dist, v)
    }

    fn weight(&mut self, w: f64) {
        self.tally.record_weight(w);
    }
}

/// Draws assumed values from their distributions.
pub struct Sampler<'r, R: Rng + ?Sized> {
    rng: &'r mut R,
    pub tally: Tally,
}

impl<'r, R: Rng + ?Sized> Sampler<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        Sampler {
            rng,
            tally: Tally::default(),
        }
    }
}

impl<R: Rng + ?Sized> Effects for Sampler<'_, R> {
    fn assume(&mut self, dist: &Dist) -> Result<Intrinsic, ErrorKind> {
        let v = dist.sample(self.rng);
        self.tally.record_assume(dist, v)
    }

    fn weight(&mut self, w: f64) {
        self.tally.record_weight(w);
    }
}

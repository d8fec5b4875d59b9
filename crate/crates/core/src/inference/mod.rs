//! Monte Carlo inference over target programs: likelihood weighting, a
//! bootstrap particle filter, and single-site lightweight MCMC.

mod bpf;
mod lw;
mod mcmc;
mod numeric;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::AnalysisConfig;
use crate::cps::TargetTerm;
use crate::frontend::AnfTerm;
use crate::interp::{Counters, EvalError, TValue};
use crate::kernel::Intrinsic;
use crate::pipeline::{compile, transform, CpsMode, PipelineError};

pub use bpf::run_bpf;
pub use lw::run_lw;
pub use mcmc::{run_mcmc, McmcOptions};
pub use numeric::{effective_sample_size, log_mean_exp, log_sum_exp, resample_systematic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Lw,
    Bpf,
    Mcmc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Lw, Algorithm::Bpf, Algorithm::Mcmc];

    /// The suspension sources each algorithm needs.
    pub fn config(self) -> AnalysisConfig {
        match self {
            Algorithm::Lw | Algorithm::Bpf => AnalysisConfig::WEIGHT,
            Algorithm::Mcmc => AnalysisConfig::ASSUME,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Lw => "lw",
            Algorithm::Bpf => "bpf",
            Algorithm::Mcmc => "mcmc",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lw" => Ok(Algorithm::Lw),
            "bpf" => Ok(Algorithm::Bpf),
            "mcmc" => Ok(Algorithm::Mcmc),
            other => Err(format!(
                "unknown inference algorithm `{other}` (expected lw, bpf, or mcmc)"
            )),
        }
    }
}

/// A compiled program ready for repeated execution.
#[derive(Debug, Clone)]
pub struct Model {
    pub anf: AnfTerm,
    pub target: TargetTerm,
    pub mode: CpsMode,
    pub cfg: AnalysisConfig,
}

impl Model {
    pub fn new(anf: AnfTerm, mode: CpsMode, cfg: AnalysisConfig) -> Result<Self, PipelineError> {
        let target = transform(&anf, mode, cfg)?;
        Ok(Model { anf, target, mode, cfg })
    }

    pub fn from_source(src: &str, mode: CpsMode, cfg: AnalysisConfig) -> Result<Self, PipelineError> {
        Model::new(compile(src)?, mode, cfg)
    }

    fn suspends_at_weight(&self) -> bool {
        match self.mode {
            CpsMode::None => false,
            CpsMode::Selective => self.cfg.suspend_weight,
            CpsMode::Full => true,
        }
    }

    fn suspends_at_assume(&self) -> bool {
        match self.mode {
            CpsMode::None => false,
            CpsMode::Selective => self.cfg.suspend_assume,
            CpsMode::Full => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    pub value: Intrinsic,
    pub log_weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub counters: Counters,
    /// Effective sample size before each resampling step.
    pub ess: Vec<f64>,
    pub resampling_steps: usize,
    pub acceptance_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    pub samples: Vec<WeightedSample>,
    /// Estimate of the log normalizing constant, when the algorithm gives one.
    pub log_norm_const: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl InferenceResult {
    /// Self-normalized weighted mean of the real-valued samples.
    pub fn posterior_mean(&self) -> Option<f64> {
        let lws: Vec<f64> = self.samples.iter().map(|s| s.log_weight).collect();
        let max = lws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return None;
        }
        let (mut num, mut den) = (0.0, 0.0);
        for s in &self.samples {
            let w = (s.log_weight - max).exp();
            num += w * s.value.as_real()?;
            den += w;
        }
        Some(num / den)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("sample {index}: {source}")]
    Eval {
        index: usize,
        #[source]
        source: EvalError,
    },
    #[error("every particle has zero weight at resampling step {step}")]
    AllZeroWeight { step: usize },
    #[error("cannot resample: every weight is zero")]
    DegenerateWeights,
    #[error(
        "{algorithm} needs suspensions at {construct}, which CPS mode `{mode}` with sources `{cfg}` does not provide"
    )]
    Unsupported {
        algorithm: Algorithm,
        construct: &'static str,
        mode: CpsMode,
        cfg: AnalysisConfig,
    },
    #[error("no initial trace with positive weight after {0} attempts")]
    NoValidInitialTrace(usize),
    #[error("sample {index} returned a closure, which has no printable value")]
    ClosureResult { index: usize },
    #[error("{0}")]
    InvalidArgument(String),
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn output(v: &TValue<'_>, index: usize) -> Result<Intrinsic, InferenceError> {
    match v {
        TValue::Const(c) | TValue::CpsConst(c) => Ok(c.clone()),
        _ => Err(InferenceError::ClosureResult { index }),
    }
}

/// Runs `algorithm` with `n` samples, particles, or iterations.
pub fn run(algorithm: Algorithm, model: &Model, n: usize, seed: u64) -> Result<InferenceResult, InferenceError> {
    match algorithm {
        Algorithm::Lw => run_lw(model, n, seed),
        Algorithm::Bpf => run_bpf(model, n, seed),
        Algorithm::Mcmc => run_mcmc(model, n, seed, McmcOptions::default()),
    }
}

#[cfg(test)]
mod tests;

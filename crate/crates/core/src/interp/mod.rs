//! Evaluators: the reference big-step interpreter over ANF programs and the
//! abstract machine that runs CPS target terms and stops at suspensions.

mod driver;
mod effects;
mod machine;
mod reference;

use std::fmt;

use thiserror::Error;

use crate::kernel::{DeltaError, Ident};

pub use driver::{drive, DriveOutcome, SusEvent};
pub use effects::{ln_weight, Effects, Replay, Sampler, Tally};
pub use machine::{cps_intrinsic, resume, start, Counters, Step, TClosure, TValue};
pub use reference::{eval, eval_sampling, eval_with, Closure, EvalOutcome, Value};

/// A sequence of arity-0 intrinsics, consumed one per `assume`.
pub type Trace = Vec<crate::kernel::Intrinsic>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ErrorKind {
    #[error("trace exhausted after {0} values")]
    TraceUnderrun(usize),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("condition is not a boolean: {0}")]
    NotBool(String),
    #[error("assume expects a distribution, got {0}")]
    NotDist(String),
    #[error("weight expects a number, got {0}")]
    NotReal(String),
    #[error("cannot apply {0}")]
    NotCallable(String),
    #[error("closures cannot be passed to intrinsic `{0}`")]
    ClosureToIntrinsic(String),
    #[error("suspension reached outside a continuation-passing context")]
    SuspensionInDirectStyle,
    #[error(transparent)]
    Delta(#[from] DeltaError),
    #[error("{0}")]
    Handler(String),
}

/// An evaluation failure, tagged with the innermost let label being
/// evaluated when it happened.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct EvalError {
    pub label: Option<Ident>,
    pub kind: ErrorKind,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(x) => write!(f, "at {}: {}", x.label(), self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl From<ErrorKind> for EvalError {
    fn from(kind: ErrorKind) -> Self {
        EvalError { label: None, kind }
    }
}

impl EvalError {
    /// Attaches `x` unless a more precise label is already present.
    pub(crate) fn at(mut self, x: &Ident) -> Self {
        if self.label.is_none() {
            self.label = Some(x.clone());
        }
        self
    }
}

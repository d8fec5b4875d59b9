use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::analysis::AnalysisConfig;
use crate::frontend::{AnfBinding, AnfTerm};
use crate::kernel::{delta_apply, Env, Ident, Intrinsic};

use super::{Effects, ErrorKind, EvalError, Replay, Sampler, Tally};

/// Runtime values of the reference interpreter.
#[derive(Clone)]
pub enum Value<'p> {
    Const(Intrinsic),
    Closure(Arc<Closure<'p>>),
}

pub struct Closure<'p> {
    pub param: &'p Ident,
    pub body: &'p AnfTerm,
    pub env: Env<Value<'p>>,
    /// Set for `let rec`: the name the closure sees itself under.
    pub rec: Option<&'p Ident>,
}

impl Value<'_> {
    pub fn as_const(&self) -> Option<&Intrinsic> {
        match self {
            Value::Const(c) => Some(c),
            Value::Closure(_) => None,
        }
    }
}

impl fmt::Display for Value<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Const(c) => write!(f, "{c}"),
            Value::Closure(c) => write!(f, "<closure {}>", c.param.label()),
        }
    }
}

impl fmt::Debug for Value<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Result of one execution under the big-step semantics.
#[derive(Debug, Clone)]
pub struct EvalOutcome<'p> {
    pub value: Value<'p>,
    /// Log of the accumulated weight, prior densities of assumed values
    /// included.
    pub log_weight: f64,
    /// The suspension flag of the whole derivation.
    pub suspended: bool,
    /// Let labels whose bound expression evaluated with the flag set.
    pub suspension_log: BTreeSet<Ident>,
    pub trace_consumed: usize,
    pub tally: Tally,
}

/// Evaluates `t` consuming `trace` for its `assume`s.
pub fn eval<'p>(t: &'p AnfTerm, trace: &[Intrinsic], cfg: AnalysisConfig) -> Result<EvalOutcome<'p>, EvalError> {
    let mut fx = Replay::new(trace);
    let (value, suspended, suspension_log) = eval_with(t, &mut fx, cfg)?;
    Ok(outcome(value, suspended, suspension_log, fx.tally))
}

/// Evaluates `t` drawing every assumed value from `rng`. The generated trace
/// is `tally.trace`; replaying it with [`eval`] reproduces the outcome.
pub fn eval_sampling<'p, R: Rng + ?Sized>(
    t: &'p AnfTerm,
    rng: &mut R,
    cfg: AnalysisConfig,
) -> Result<EvalOutcome<'p>, EvalError> {
    let mut fx = Sampler::new(rng);
    let (value, suspended, suspension_log) = eval_with(t, &mut fx, cfg)?;
    Ok(outcome(value, suspended, suspension_log, fx.tally))
}

fn outcome<'p>(value: Value<'p>, suspended: bool, suspension_log: BTreeSet<Ident>, tally: Tally) -> EvalOutcome<'p> {
    EvalOutcome {
        value,
        log_weight: tally.log_weight(),
        suspended,
        suspension_log,
        trace_consumed: tally.trace.len(),
        tally,
    }
}

/// Evaluates `t` with a caller-supplied effect handler. Returns the value,
/// the suspension flag, and the suspension log.
pub fn eval_with<'p>(
    t: &'p AnfTerm,
    fx: &mut dyn Effects,
    cfg: AnalysisConfig,
) -> Result<(Value<'p>, bool, BTreeSet<Ident>), EvalError> {
    let mut interp = Interp {
        cfg,
        fx,
        log: BTreeSet::new(),
    };
    let (v, u) = interp.term(Env::empty(), t)?;
    Ok((v, u, interp.log))
}

struct Interp<'f> {
    cfg: AnalysisConfig,
    fx: &'f mut dyn Effects,
    log: BTreeSet<Ident>,
}

fn lookup<'p>(env: &Env<Value<'p>>, x: &Ident) -> Result<Value<'p>, EvalError> {
    env.lookup(x)
        .cloned()
        .ok_or_else(|| ErrorKind::Unbound(x.label()).into())
}

impl<'p> Interp<'_> {
    fn term(&mut self, mut env: Env<Value<'p>>, t: &'p AnfTerm) -> Result<(Value<'p>, bool), EvalError> {
        let mut u = false;
        let mut cur = t;
        loop {
            match cur {
                AnfTerm::Ret(x) => return Ok((lookup(&env, x)?, u)),
                AnfTerm::Let(x, b, rest) => {
                    let (v, u1) = self.binding(&env, x, b).map_err(|e| e.at(x))?;
                    if u1 {
                        self.log.insert(x.clone());
                    }
                    u |= u1;
                    env = env.extend(x.clone(), v);
                    cur = rest;
                }
            }
        }
    }

    fn binding(
        &mut self,
        env: &Env<Value<'p>>,
        x: &'p Ident,
        b: &'p AnfBinding,
    ) -> Result<(Value<'p>, bool), EvalError> {
        match b {
            AnfBinding::Var(y) => Ok((lookup(env, y)?, false)),
            AnfBinding::Const(c) => Ok((Value::Const(c.clone()), false)),
            AnfBinding::Lam { param, body, recursive } => {
                let clo = Closure {
                    param,
                    body,
                    env: env.clone(),
                    rec: recursive.then_some(x),
                };
                Ok((Value::Closure(Arc::new(clo)), false))
            }
            AnfBinding::App(f, a) => {
                let (fv, av) = (lookup(env, f)?, lookup(env, a)?);
                match fv {
                    Value::Closure(clo) => {
                        let mut env = clo.env.clone();
                        if let Some(r) = clo.rec {
                            env = env.extend(r.clone(), Value::Closure(clo.clone()));
                        }
                        env = env.extend(clo.param.clone(), av);
                        self.term(env, clo.body)
                    }
                    Value::Const(c) => {
                        let arg = match av {
                            Value::Const(a) => a,
                            Value::Closure(_) => return Err(ErrorKind::ClosureToIntrinsic(c.to_string()).into()),
                        };
                        let r = delta_apply(&c, &arg).map_err(ErrorKind::from)?;
                        Ok((Value::Const(r), false))
                    }
                }
            }
            AnfBinding::If(c, th, el) => {
                let cond = match lookup(env, c)? {
                    Value::Const(Intrinsic::Bool(b)) => b,
                    other => return Err(ErrorKind::NotBool(other.to_string()).into()),
                };
                self.term(env.clone(), if cond { th } else { el })
            }
            AnfBinding::Assume(y) => {
                let d = match lookup(env, y)? {
                    Value::Const(Intrinsic::Dist(d)) => d,
                    other => return Err(ErrorKind::NotDist(other.to_string()).into()),
                };
                let v = self.fx.assume(&d)?;
                Ok((Value::Const(v), self.cfg.suspend_assume))
            }
            AnfBinding::Weight(y) => {
                let w = match lookup(env, y)? {
                    Value::Const(c) => c.as_real().ok_or_else(|| ErrorKind::NotReal(c.to_string()))?,
                    other => return Err(ErrorKind::NotReal(other.to_string()).into()),
                };
                self.fx.weight(w);
                Ok((Value::Const(Intrinsic::Unit), self.cfg.suspend_weight))
            }
        }
    }
}

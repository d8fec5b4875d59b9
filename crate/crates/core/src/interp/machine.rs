use std::fmt;
use std::sync::Arc;

use crate::cps::{LamKind, TargetTerm};
use crate::kernel::{arity, delta_apply, Dist, Env, Ident, Intrinsic};

use super::{Effects, ErrorKind, EvalError};

/// Runtime values of target programs.
#[derive(Clone)]
pub enum TValue<'t> {
    Const(Intrinsic),
    /// An intrinsic expecting a continuation next.
    CpsConst(Intrinsic),
    /// A CPS intrinsic that has received its continuation and now expects
    /// an argument.
    CpsPartial(Intrinsic, Arc<TValue<'t>>),
    Closure(Arc<TClosure<'t>>),
}

pub struct TClosure<'t> {
    pub param: &'t Ident,
    pub body: &'t TargetTerm,
    pub env: Env<TValue<'t>>,
    pub rec: Option<&'t Ident>,
}

impl TValue<'_> {
    pub fn as_const(&self) -> Option<&Intrinsic> {
        match self {
            TValue::Const(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for TValue<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TValue::Const(c) => write!(f, "{c}"),
            TValue::CpsConst(c) => write!(f, "{c}_cps"),
            TValue::CpsPartial(c, _) => write!(f, "<{c}_cps k>"),
            TValue::Closure(c) => write!(f, "<closure {}>", c.param.label()),
        }
    }
}

impl fmt::Debug for TValue<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The CPS version of an intrinsic function: applied to a continuation and
/// then an argument, it passes the delta result to the continuation.
pub fn cps_intrinsic<'t>(c: Intrinsic) -> TValue<'t> {
    assert!(arity(&c) > 0, "only intrinsic functions have CPS versions");
    TValue::CpsConst(c)
}

/// Where an execution stopped.
#[derive(Debug, Clone)]
pub enum Step<'t> {
    Done(TValue<'t>),
    Assume { label: Ident, dist: Dist, k: TValue<'t> },
    Weight { label: Ident, weight: f64, k: TValue<'t> },
}

/// Instrumentation shared across the steps of one or more executions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    /// Closures created for continuations: continuation lambdas, the inner
    /// closures of CPS functions once their continuation is supplied, and
    /// CPS intrinsics holding a continuation.
    pub continuation_allocs: u64,
    pub suspensions: u64,
}

/// Runs `t` from the beginning until it finishes or suspends.
pub fn start<'t>(t: &'t TargetTerm, fx: &mut dyn Effects, counters: &mut Counters) -> Result<Step<'t>, EvalError> {
    Machine { fx, counters }.run(Focus::Eval(Env::empty(), t))
}

/// Resumes a suspended execution by passing `v` to its continuation.
/// Continuations may be resumed any number of times.
pub fn resume<'t>(
    k: &TValue<'t>,
    v: TValue<'t>,
    fx: &mut dyn Effects,
    counters: &mut Counters,
) -> Result<Step<'t>, EvalError> {
    Machine { fx, counters }.run(Focus::Apply(k.clone(), v))
}

enum Focus<'t> {
    Eval(Env<TValue<'t>>, &'t TargetTerm),
    Apply(TValue<'t>, TValue<'t>),
}

struct Machine<'a> {
    fx: &'a mut dyn Effects,
    counters: &'a mut Counters,
}

fn lookup<'t>(env: &Env<TValue<'t>>, x: &Ident) -> Result<TValue<'t>, EvalError> {
    env.lookup(x)
        .cloned()
        .ok_or_else(|| ErrorKind::Unbound(x.label()).into())
}

fn wrap<'t>(r: Intrinsic) -> TValue<'t> {
    if arity(&r) > 0 {
        TValue::CpsConst(r)
    } else {
        TValue::Const(r)
    }
}

fn real(v: TValue<'_>) -> Result<f64, EvalError> {
    match &v {
        TValue::Const(c) => c.as_real(),
        _ => None,
    }
    .ok_or_else(|| ErrorKind::NotReal(v.to_string()).into())
}

fn dist(v: TValue<'_>) -> Result<Dist, EvalError> {
    match v {
        TValue::Const(Intrinsic::Dist(d)) => Ok(d),
        other => Err(ErrorKind::NotDist(other.to_string()).into()),
    }
}

fn condition(v: TValue<'_>) -> Result<bool, EvalError> {
    match v {
        TValue::Const(Intrinsic::Bool(b)) => Ok(b),
        other => Err(ErrorKind::NotBool(other.to_string()).into()),
    }
}

impl<'t> Machine<'_> {
    /// Evaluates in tail position: applications become jumps, and a
    /// suspension object ends the run.
    fn run(&mut self, mut focus: Focus<'t>) -> Result<Step<'t>, EvalError> {
        loop {
            focus = match focus {
                Focus::Eval(env, t) => match t {
                    TargetTerm::Let(x, e1, e2) => {
                        let v = self.direct(&env, e1).map_err(|e| e.at(x))?;
                        Focus::Eval(env.extend(x.clone(), v), e2)
                    }
                    TargetTerm::LetRec { name, value, rest } => {
                        let v = self.rec_closure(&env, name, value);
                        Focus::Eval(env.extend(name.clone(), v), rest)
                    }
                    TargetTerm::If(c, th, el) => {
                        let b = condition(self.direct(&env, c)?)?;
                        Focus::Eval(env, if b { th } else { el })
                    }
                    TargetTerm::App(f, a) => Focus::Apply(self.direct(&env, f)?, self.direct(&env, a)?),
                    TargetTerm::SusAssume { label, dist: d, cont } => {
                        let d = dist(self.direct(&env, d)?).map_err(|e| e.at(label))?;
                        let k = self.direct(&env, cont)?;
                        self.counters.suspensions += 1;
                        return Ok(Step::Assume {
                            label: label.clone(),
                            dist: d,
                            k,
                        });
                    }
                    TargetTerm::SusWeight { label, weight, cont } => {
                        let w = real(self.direct(&env, weight)?).map_err(|e| e.at(label))?;
                        let k = self.direct(&env, cont)?;
                        self.counters.suspensions += 1;
                        return Ok(Step::Weight {
                            label: label.clone(),
                            weight: w,
                            k,
                        });
                    }
                    other => return Ok(Step::Done(self.direct(&env, other)?)),
                },
                Focus::Apply(f, a) => match f {
                    TValue::Closure(clo) => Focus::Eval(self.enter(&clo, a), clo.body),
                    TValue::CpsPartial(c, k) => {
                        let r = self.delta(&c, a)?;
                        Focus::Apply((*k).clone(), wrap(r))
                    }
                    other => return Ok(Step::Done(self.apply(other, a)?)),
                },
            }
        }
    }

    fn enter(&mut self, clo: &Arc<TClosure<'t>>, arg: TValue<'t>) -> Env<TValue<'t>> {
        let mut env = clo.env.clone();
        if let Some(r) = clo.rec {
            env = env.extend(r.clone(), TValue::Closure(clo.clone()));
        }
        env.extend(clo.param.clone(), arg)
    }

    fn delta(&mut self, c: &Intrinsic, a: TValue<'t>) -> Result<Intrinsic, EvalError> {
        match a {
            TValue::Const(arg) => Ok(delta_apply(c, &arg).map_err(ErrorKind::from)?),
            _ => Err(ErrorKind::ClosureToIntrinsic(c.to_string()).into()),
        }
    }

    fn closure(&mut self, env: &Env<TValue<'t>>, t: &'t TargetTerm, rec: Option<&'t Ident>) -> TValue<'t> {
        let TargetTerm::Lam { param, body, kind } = t else {
            unreachable!("closure built from a non-lambda")
        };
        if matches!(kind, LamKind::Continuation | LamKind::CpsBody) {
            self.counters.continuation_allocs += 1;
        }
        TValue::Closure(Arc::new(TClosure {
            param,
            body,
            env: env.clone(),
            rec,
        }))
    }

    fn rec_closure(&mut self, env: &Env<TValue<'t>>, name: &'t Ident, value: &'t TargetTerm) -> TValue<'t> {
        self.closure(env, value, Some(name))
    }

    /// Evaluates a sub-expression whose value is needed immediately.
    fn direct(&mut self, env: &Env<TValue<'t>>, t: &'t TargetTerm) -> Result<TValue<'t>, EvalError> {
        match t {
            TargetTerm::Var(x) => lookup(env, x),
            TargetTerm::Const(c) => Ok(TValue::Const(c.clone())),
            TargetTerm::CpsConst(c) => Ok(TValue::CpsConst(c.clone())),
            TargetTerm::Lam { .. } => Ok(self.closure(env, t, None)),
            TargetTerm::App(f, a) => {
                let f = self.direct(env, f)?;
                let a = self.direct(env, a)?;
                self.apply(f, a)
            }
            TargetTerm::Let(x, e1, e2) => {
                let v = self.direct(env, e1).map_err(|e| e.at(x))?;
                self.direct(&env.extend(x.clone(), v), e2)
            }
            TargetTerm::LetRec { name, value, rest } => {
                let v = self.rec_closure(env, name, value);
                self.direct(&env.extend(name.clone(), v), rest)
            }
            TargetTerm::If(c, th, el) => {
                let b = condition(self.direct(env, c)?)?;
                self.direct(env, if b { th } else { el })
            }
            TargetTerm::Assume(d) => {
                let d = dist(self.direct(env, d)?)?;
                Ok(TValue::Const(self.fx.assume(&d)?))
            }
            TargetTerm::Weight(w) => {
                let w = real(self.direct(env, w)?)?;
                self.fx.weight(w);
                Ok(TValue::Const(Intrinsic::Unit))
            }
            TargetTerm::SusAssume { .. } | TargetTerm::SusWeight { .. } => {
                Err(ErrorKind::SuspensionInDirectStyle.into())
            }
        }
    }

    fn apply(&mut self, f: TValue<'t>, a: TValue<'t>) -> Result<TValue<'t>, EvalError> {
        match f {
            TValue::Closure(clo) => {
                let env = self.enter(&clo, a);
                self.direct(&env, clo.body)
            }
            TValue::Const(c) => Ok(TValue::Const(self.delta(&c, a)?)),
            TValue::CpsConst(c) => {
                self.counters.continuation_allocs += 1;
                Ok(TValue::CpsPartial(c, Arc::new(a)))
            }
            TValue::CpsPartial(c, k) => {
                let r = self.delta(&c, a)?;
                self.apply((*k).clone(), wrap(r))
            }
        }
    }
}

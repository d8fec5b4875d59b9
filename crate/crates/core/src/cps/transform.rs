use std::collections::BTreeSet;

use thiserror::Error;

use crate::analysis::{analyze, uniformity_violations, AnalysisConfig};
use crate::frontend::{AnfBinding, AnfTerm};
use crate::kernel::{arity, IdGen, Ident};

use super::{LamKind, TargetTerm};

/// Labels and lambda parameters selected for transformation.
pub type Vars = BTreeSet<Ident>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CpsError {
    #[error("application {} is {} but callee {} is not", app.label(), if *app_selected { "selected" } else { "not selected" }, callee.label())]
    MalformedVars {
        app: Ident,
        callee: Ident,
        app_selected: bool,
    },
    #[error("analysis failed: {0}")]
    Analysis(#[from] crate::analysis::AnalysisError),
}

/// Every label and lambda parameter of `t`: the selection of a full CPS
/// transformation.
pub fn all_labels(t: &AnfTerm) -> Vars {
    t.binders().into_iter().collect()
}

/// Whether `t` is `let x = _ in x`.
pub fn tail_call(t: &AnfTerm) -> bool {
    matches!(t, AnfTerm::Let(x, _, rest) if matches!(&**rest, AnfTerm::Ret(y) if y == x))
}

/// Transforms `t`, first checking that every application agrees with all
/// callees that may reach it on whether it is selected.
pub fn selective_cps(vars: &Vars, t: &AnfTerm) -> Result<TargetTerm, CpsError> {
    if !vars.is_empty() {
        let flow = analyze(t, AnalysisConfig::NONE)?;
        if let Some((app, callee)) = uniformity_violations(t, &flow, vars).into_iter().next() {
            let app_selected = vars.contains(&app);
            return Err(CpsError::MalformedVars {
                app,
                callee,
                app_selected,
            });
        }
    }
    Ok(cps_unchecked(vars, t))
}

/// Transforms `t` without validating `vars`.
pub fn cps_unchecked(vars: &Vars, t: &AnfTerm) -> TargetTerm {
    let mut cx = Cps {
        vars,
        ids: IdGen::after(t.max_id()),
    };
    cx.term(None, t)
}

struct Cps<'v> {
    vars: &'v Vars,
    ids: IdGen,
}

impl Cps<'_> {
    fn selected(&self, x: &Ident) -> bool {
        self.vars.contains(x)
    }

    fn continuation(&mut self, x: &Ident, body: TargetTerm) -> TargetTerm {
        TargetTerm::lam(x.clone(), body, LamKind::Continuation)
    }

    /// `let k = lam x. body in use(k)`
    fn bind_continuation(
        &mut self,
        x: &Ident,
        body: TargetTerm,
        rest: impl FnOnce(&mut Self, &Ident) -> TargetTerm,
    ) -> TargetTerm {
        let k = self.ids.fresh("%k");
        let lam = self.continuation(x, body);
        let rest = rest(self, &k);
        TargetTerm::let_(k, lam, rest)
    }

    fn term(&mut self, cont: Option<&Ident>, t: &AnfTerm) -> TargetTerm {
        let (x, b, rest) = match t {
            AnfTerm::Ret(x) => {
                return match cont {
                    None => TargetTerm::var(x),
                    Some(k) => TargetTerm::app(TargetTerm::var(k), TargetTerm::var(x)),
                }
            }
            AnfTerm::Let(x, b, rest) => (x, b, &**rest),
        };
        let tail = tail_call(t);
        let direct = |cx: &mut Self, e1: TargetTerm| TargetTerm::let_(x.clone(), e1, cx.term(cont, rest));
        match b {
            AnfBinding::Var(_) => direct(self, TargetTerm::from_binding(b)),
            AnfBinding::Const(c) => {
                if self.selected(x) && arity(c) > 0 {
                    direct(self, TargetTerm::CpsConst(c.clone()))
                } else {
                    direct(self, TargetTerm::Const(c.clone()))
                }
            }
            AnfBinding::Lam { param, body, recursive } => {
                let value = if self.selected(param) {
                    let k = self.ids.fresh("%k");
                    let inner = TargetTerm::lam(param.clone(), self.term(Some(&k), body), LamKind::CpsBody);
                    TargetTerm::lam(k, inner, LamKind::CpsEntry)
                } else {
                    TargetTerm::lam(param.clone(), self.term(None, body), LamKind::Source)
                };
                let rest = self.term(cont, rest);
                if *recursive {
                    TargetTerm::LetRec {
                        name: x.clone(),
                        value: Box::new(value),
                        rest: Box::new(rest),
                    }
                } else {
                    TargetTerm::let_(x.clone(), value, rest)
                }
            }
            AnfBinding::App(f, a) => {
                if !self.selected(x) {
                    return direct(self, TargetTerm::from_binding(b));
                }
                let call = |k: &Ident| {
                    TargetTerm::app(
                        TargetTerm::app(TargetTerm::var(f), TargetTerm::var(k)),
                        TargetTerm::var(a),
                    )
                };
                match cont {
                    Some(k) if tail => call(k),
                    _ => {
                        let body = self.term(cont, rest);
                        self.bind_continuation(x, body, |_, k| call(k))
                    }
                }
            }
            AnfBinding::If(c, th, el) => {
                if !self.selected(x) {
                    let th = self.term(None, th);
                    let el = self.term(None, el);
                    let e1 = TargetTerm::If(Box::new(TargetTerm::var(c)), Box::new(th), Box::new(el));
                    return direct(self, e1);
                }
                let branch = |cx: &mut Self, k: &Ident| {
                    let th = cx.term(Some(k), th);
                    let el = cx.term(Some(k), el);
                    TargetTerm::If(Box::new(TargetTerm::var(c)), Box::new(th), Box::new(el))
                };
                match cont {
                    Some(k) if tail => branch(self, k),
                    _ => {
                        let body = self.term(cont, rest);
                        self.bind_continuation(x, body, branch)
                    }
                }
            }
            AnfBinding::Assume(y) | AnfBinding::Weight(y) => {
                if !self.selected(x) {
                    return direct(self, TargetTerm::from_binding(b));
                }
                let k = if tail {
                    match cont {
                        Some(k) => TargetTerm::var(k),
                        None => self.continuation(x, TargetTerm::var(x)),
                    }
                } else {
                    let body = self.term(cont, rest);
                    self.continuation(x, body)
                };
                let (label, arg, cont) = (x.clone(), Box::new(TargetTerm::var(y)), Box::new(k));
                match b {
                    AnfBinding::Assume(_) => TargetTerm::SusAssume { label, dist: arg, cont },
                    _ => TargetTerm::SusWeight {
                        label,
                        weight: arg,
                        cont,
                    },
                }
            }
        }
    }
}

use crate::frontend::{AnfBinding, AnfTerm};
use crate::kernel::{Ident, Intrinsic};

/// Where a target-language lambda came from. The evaluator uses this to
/// count continuation closures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LamKind {
    /// A lambda of the original program left in direct style.
    Source,
    /// The outer `lam k.` of a transformed source lambda.
    CpsEntry,
    /// The inner lambda of a transformed source lambda, built once `k` is known.
    CpsBody,
    /// A continuation introduced by the transformation.
    Continuation,
}

/// Output of the CPS transformation: source terms plus suspension objects.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetTerm {
    Var(Ident),
    Const(Intrinsic),
    /// An intrinsic taking its continuation before each argument.
    CpsConst(Intrinsic),
    Lam {
        param: Ident,
        body: Box<TargetTerm>,
        kind: LamKind,
    },
    App(Box<TargetTerm>, Box<TargetTerm>),
    Let(Ident, Box<TargetTerm>, Box<TargetTerm>),
    /// `value` is always a lambda; `name` is visible inside it.
    LetRec {
        name: Ident,
        value: Box<TargetTerm>,
        rest: Box<TargetTerm>,
    },
    If(Box<TargetTerm>, Box<TargetTerm>, Box<TargetTerm>),
    Assume(Box<TargetTerm>),
    Weight(Box<TargetTerm>),
    SusAssume {
        label: Ident,
        dist: Box<TargetTerm>,
        cont: Box<TargetTerm>,
    },
    SusWeight {
        label: Ident,
        weight: Box<TargetTerm>,
        cont: Box<TargetTerm>,
    },
}

impl TargetTerm {
    pub fn var(x: &Ident) -> Self {
        TargetTerm::Var(x.clone())
    }

    pub fn app(f: TargetTerm, a: TargetTerm) -> Self {
        TargetTerm::App(Box::new(f), Box::new(a))
    }

    pub fn lam(param: Ident, body: TargetTerm, kind: LamKind) -> Self {
        TargetTerm::Lam {
            param,
            body: Box::new(body),
            kind,
        }
    }

    pub fn let_(x: Ident, e1: TargetTerm, e2: TargetTerm) -> Self {
        TargetTerm::Let(x, Box::new(e1), Box::new(e2))
    }

    /// The direct-style embedding of an ANF term.
    pub fn from_anf(t: &AnfTerm) -> Self {
        match t {
            AnfTerm::Ret(x) => TargetTerm::var(x),
            AnfTerm::Let(x, b, rest) => {
                let rest = TargetTerm::from_anf(rest);
                match b {
                    AnfBinding::Lam {
                        param,
                        body,
                        recursive: true,
                    } => TargetTerm::LetRec {
                        name: x.clone(),
                        value: Box::new(TargetTerm::lam(
                            param.clone(),
                            TargetTerm::from_anf(body),
                            LamKind::Source,
                        )),
                        rest: Box::new(rest),
                    },
                    other => TargetTerm::let_(x.clone(), Self::from_binding(other), rest),
                }
            }
        }
    }

    pub(crate) fn from_binding(b: &AnfBinding) -> Self {
        match b {
            AnfBinding::Var(y) => TargetTerm::var(y),
            AnfBinding::Const(c) => TargetTerm::Const(c.clone()),
            AnfBinding::Lam { param, body, .. } => {
                TargetTerm::lam(param.clone(), TargetTerm::from_anf(body), LamKind::Source)
            }
            AnfBinding::App(f, a) => TargetTerm::app(TargetTerm::var(f), TargetTerm::var(a)),
            AnfBinding::If(c, t, e) => TargetTerm::If(
                Box::new(TargetTerm::var(c)),
                Box::new(TargetTerm::from_anf(t)),
                Box::new(TargetTerm::from_anf(e)),
            ),
            AnfBinding::Assume(y) => TargetTerm::Assume(Box::new(TargetTerm::var(y))),
            AnfBinding::Weight(y) => TargetTerm::Weight(Box::new(TargetTerm::var(y))),
        }
    }

    /// Calls `f` on every sub-term, parents before children.
    pub fn walk(&self, f: &mut impl FnMut(&TargetTerm)) {
        f(self);
        match self {
            TargetTerm::Var(_) | TargetTerm::Const(_) | TargetTerm::CpsConst(_) => {}
            TargetTerm::Lam { body, .. } => body.walk(f),
            TargetTerm::App(a, b) | TargetTerm::Let(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            TargetTerm::LetRec { value, rest, .. } => {
                value.walk(f);
                rest.walk(f);
            }
            TargetTerm::If(c, t, e) => {
                c.walk(f);
                t.walk(f);
                e.walk(f);
            }
            TargetTerm::Assume(a) | TargetTerm::Weight(a) => a.walk(f),
            TargetTerm::SusAssume { dist: a, cont, .. } | TargetTerm::SusWeight { weight: a, cont, .. } => {
                a.walk(f);
                cont.walk(f);
            }
        }
    }

    /// Number of `(SusAssume, SusWeight)` nodes.
    pub fn count_sus(&self) -> (usize, usize) {
        let mut counts = (0, 0);
        self.walk(&mut |t| match t {
            TargetTerm::SusAssume { .. } => counts.0 += 1,
            TargetTerm::SusWeight { .. } => counts.1 += 1,
            _ => {}
        });
        counts
    }

    pub fn count_cps_consts(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |t| {
            if matches!(t, TargetTerm::CpsConst(_)) {
                n += 1
            }
        });
        n
    }
}

//! Source-language terms and desugaring.

use std::collections::{BTreeSet, HashMap};

use super::ident::{IdGen, Ident};
use super::intrinsic::Intrinsic;

#[derive(Debug, Clone, PartialEq)]
pub enum SourceTerm {
    Var(Ident),
    Const(Intrinsic),
    Lam(Ident, Box<SourceTerm>),
    App(Box<SourceTerm>, Box<SourceTerm>),
    Let(Ident, Box<SourceTerm>, Box<SourceTerm>),
    /// `let rec name = lam param. body in rest`
    LetRec {
        name: Ident,
        param: Ident,
        body: Box<SourceTerm>,
        rest: Box<SourceTerm>,
    },
    If(Box<SourceTerm>, Box<SourceTerm>, Box<SourceTerm>),
    Assume(Box<SourceTerm>),
    Weight(Box<SourceTerm>),
    /// `t1; t2`
    Seq(Box<SourceTerm>, Box<SourceTerm>),
}

impl SourceTerm {
    pub fn var(x: &Ident) -> Self {
        SourceTerm::Var(x.clone())
    }

    pub fn lam(x: Ident, body: SourceTerm) -> Self {
        SourceTerm::Lam(x, Box::new(body))
    }

    pub fn app(f: SourceTerm, a: SourceTerm) -> Self {
        SourceTerm::App(Box::new(f), Box::new(a))
    }

    pub fn let_(x: Ident, e1: SourceTerm, e2: SourceTerm) -> Self {
        SourceTerm::Let(x, Box::new(e1), Box::new(e2))
    }

    pub fn if_(c: SourceTerm, t: SourceTerm, e: SourceTerm) -> Self {
        SourceTerm::If(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn seq(a: SourceTerm, b: SourceTerm) -> Self {
        SourceTerm::Seq(Box::new(a), Box::new(b))
    }

    /// Largest unique id occurring anywhere in the term.
    pub fn max_id(&self) -> u32 {
        let mut max = 0;
        self.visit_idents(&mut |x| max = max.max(x.id()));
        max
    }

    fn visit_idents(&self, f: &mut impl FnMut(&Ident)) {
        match self {
            SourceTerm::Var(x) => f(x),
            SourceTerm::Const(_) => {}
            SourceTerm::Lam(x, b) => {
                f(x);
                b.visit_idents(f);
            }
            SourceTerm::App(a, b) | SourceTerm::Seq(a, b) => {
                a.visit_idents(f);
                b.visit_idents(f);
            }
            SourceTerm::Let(x, a, b) => {
                f(x);
                a.visit_idents(f);
                b.visit_idents(f);
            }
            SourceTerm::LetRec {
                name,
                param,
                body,
                rest,
            } => {
                f(name);
                f(param);
                body.visit_idents(f);
                rest.visit_idents(f);
            }
            SourceTerm::If(c, t, e) => {
                c.visit_idents(f);
                t.visit_idents(f);
                e.visit_idents(f);
            }
            SourceTerm::Assume(a) | SourceTerm::Weight(a) => a.visit_idents(f),
        }
    }

    pub fn contains_seq(&self) -> bool {
        match self {
            SourceTerm::Seq(..) => true,
            SourceTerm::Var(_) | SourceTerm::Const(_) => false,
            SourceTerm::Lam(_, b) | SourceTerm::Assume(b) | SourceTerm::Weight(b) => b.contains_seq(),
            SourceTerm::App(a, b) | SourceTerm::Let(_, a, b) => a.contains_seq() || b.contains_seq(),
            SourceTerm::LetRec { body, rest, .. } => body.contains_seq() || rest.contains_seq(),
            SourceTerm::If(c, t, e) => c.contains_seq() || t.contains_seq() || e.contains_seq(),
        }
    }
}

/// Free variables of `t`.
pub fn free_vars(t: &SourceTerm) -> BTreeSet<Ident> {
    fn go(t: &SourceTerm, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
        match t {
            SourceTerm::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            SourceTerm::Const(_) => {}
            SourceTerm::Lam(x, b) => {
                bound.push(x.clone());
                go(b, bound, out);
                bound.pop();
            }
            SourceTerm::App(a, b) | SourceTerm::Seq(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            SourceTerm::Let(x, a, b) => {
                go(a, bound, out);
                bound.push(x.clone());
                go(b, bound, out);
                bound.pop();
            }
            SourceTerm::LetRec {
                name,
                param,
                body,
                rest,
            } => {
                bound.push(name.clone());
                bound.push(param.clone());
                go(body, bound, out);
                bound.pop();
                go(rest, bound, out);
                bound.pop();
            }
            SourceTerm::If(c, th, el) => {
                go(c, bound, out);
                go(th, bound, out);
                go(el, bound, out);
            }
            SourceTerm::Assume(a) | SourceTerm::Weight(a) => go(a, bound, out),
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Eliminates `t1; t2` (as `(lam _. t2) t1`) and gives every binding site
/// a fresh unique id. Recursive bindings stay native.
pub fn desugar(t: &SourceTerm) -> SourceTerm {
    let mut d = Desugarer {
        ids: IdGen::after(t.max_id()),
        scope: HashMap::new(),
    };
    d.go(t)
}

struct Desugarer {
    ids: IdGen,
    // binder as written -> stack of renamed binders
    scope: HashMap<Ident, Vec<Ident>>,
}

impl Desugarer {
    fn bind(&mut self, x: &Ident) -> Ident {
        let fresh = x.with_id(self.ids.fresh_id());
        self.scope.entry(x.clone()).or_default().push(fresh.clone());
        fresh
    }

    fn unbind(&mut self, x: &Ident) {
        if let Some(stack) = self.scope.get_mut(x) {
            stack.pop();
        }
    }

    fn resolve(&self, x: &Ident) -> Ident {
        self.scope
            .get(x)
            .and_then(|s| s.last())
            .cloned()
            .unwrap_or_else(|| x.clone())
    }

    fn go(&mut self, t: &SourceTerm) -> SourceTerm {
        match t {
            SourceTerm::Var(x) => SourceTerm::Var(self.resolve(x)),
            SourceTerm::Const(c) => SourceTerm::Const(c.clone()),
            SourceTerm::Lam(x, b) => {
                let x2 = self.bind(x);
                let b2 = self.go(b);
                self.unbind(x);
                SourceTerm::lam(x2, b2)
            }
            SourceTerm::App(a, b) => SourceTerm::app(self.go(a), self.go(b)),
            SourceTerm::Let(x, a, b) => {
                let a2 = self.go(a);
                let x2 = self.bind(x);
                let b2 = self.go(b);
                self.unbind(x);
                SourceTerm::let_(x2, a2, b2)
            }
            SourceTerm::LetRec {
                name,
                param,
                body,
                rest,
            } => {
                let name2 = self.bind(name);
                let param2 = self.bind(param);
                let body2 = self.go(body);
                self.unbind(param);
                let rest2 = self.go(rest);
                self.unbind(name);
                SourceTerm::LetRec {
                    name: name2,
                    param: param2,
                    body: Box::new(body2),
                    rest: Box::new(rest2),
                }
            }
            SourceTerm::If(c, th, el) => SourceTerm::if_(self.go(c), self.go(th), self.go(el)),
            SourceTerm::Assume(a) => SourceTerm::Assume(Box::new(self.go(a))),
            SourceTerm::Weight(a) => SourceTerm::Weight(Box::new(self.go(a))),
            SourceTerm::Seq(a, b) => {
                let a2 = self.go(a);
                let wild = self.ids.fresh("_");
                let b2 = self.go(b);
                SourceTerm::app(SourceTerm::lam(wild, b2), a2)
            }
        }
    }
}

/// Structural equality up to consistent renaming of bound variables.
pub fn alpha_eq(a: &SourceTerm, b: &SourceTerm) -> bool {
    fn var_eq(x: &Ident, y: &Ident, env: &[(Ident, Ident)]) -> bool {
        let px = env.iter().rposition(|(l, _)| l == x);
        let py = env.iter().rposition(|(_, r)| r == y);
        match (px, py) {
            (None, None) => x == y,
            (p, q) => p == q,
        }
    }
    fn go(a: &SourceTerm, b: &SourceTerm, env: &mut Vec<(Ident, Ident)>) -> bool {
        use SourceTerm::*;
        match (a, b) {
            (Var(x), Var(y)) => var_eq(x, y, env),
            (Const(c), Const(d)) => c == d,
            (Lam(x, s), Lam(y, t)) => {
                env.push((x.clone(), y.clone()));
                let r = go(s, t, env);
                env.pop();
                r
            }
            (App(a1, a2), App(b1, b2)) | (Seq(a1, a2), Seq(b1, b2)) => go(a1, b1, env) && go(a2, b2, env),
            (Let(x, a1, a2), Let(y, b1, b2)) => {
                if !go(a1, b1, env) {
                    return false;
                }
                env.push((x.clone(), y.clone()));
                let r = go(a2, b2, env);
                env.pop();
                r
            }
            (
                LetRec {
                    name: n1,
                    param: p1,
                    body: b1,
                    rest: r1,
                },
                LetRec {
                    name: n2,
                    param: p2,
                    body: b2,
                    rest: r2,
                },
            ) => {
                env.push((n1.clone(), n2.clone()));
                env.push((p1.clone(), p2.clone()));
                let body_ok = go(b1, b2, env);
                env.pop();
                let rest_ok = body_ok && go(r1, r2, env);
                env.pop();
                rest_ok
            }
            (If(c1, t1, e1), If(c2, t2, e2)) => go(c1, c2, env) && go(t1, t2, env) && go(e1, e2, env),
            (Assume(x), Assume(y)) | (Weight(x), Weight(y)) => go(x, y, env),
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

/// True when every binding site carries a distinct id.
pub fn binders_unique(t: &SourceTerm) -> bool {
    fn go(t: &SourceTerm, seen: &mut BTreeSet<u32>) -> bool {
        let mut fresh = |x: &Ident| seen.insert(x.id());
        match t {
            SourceTerm::Var(_) | SourceTerm::Const(_) => true,
            SourceTerm::Lam(x, b) => fresh(x) && go(b, seen),
            SourceTerm::App(a, b) | SourceTerm::Seq(a, b) => go(a, seen) && go(b, seen),
            SourceTerm::Let(x, a, b) => fresh(x) && go(a, seen) && go(b, seen),
            SourceTerm::LetRec {
                name,
                param,
                body,
                rest,
            } => fresh(name) && fresh(param) && go(body, seen) && go(rest, seen),
            SourceTerm::If(c, th, el) => go(c, seen) && go(th, seen) && go(el, seen),
            SourceTerm::Assume(a) | SourceTerm::Weight(a) => go(a, seen),
        }
    }
    go(t, &mut BTreeSet::new())
}

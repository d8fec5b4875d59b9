use std::collections::HashSet;

use crate::kernel::{IdGen, Ident, Intrinsic, SourceTerm};

/// A-normal form: a chain of uniquely labeled bindings ending in a variable.
#[derive(Debug, Clone, PartialEq)]
pub enum AnfTerm {
    Ret(Ident),
    Let(Ident, AnfBinding, Box<AnfTerm>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnfBinding {
    Var(Ident),
    Const(Intrinsic),
    /// `recursive` marks a `let rec` binding: the label is visible in `body`.
    Lam {
        param: Ident,
        body: Box<AnfTerm>,
        recursive: bool,
    },
    App(Ident, Ident),
    If(Ident, Box<AnfTerm>, Box<AnfTerm>),
    Assume(Ident),
    Weight(Ident),
}

impl AnfTerm {
    /// The variable the term returns.
    pub fn name(&self) -> &Ident {
        let mut t = self;
        loop {
            match t {
                AnfTerm::Ret(x) => return x,
                AnfTerm::Let(_, _, rest) => t = rest,
            }
        }
    }

    /// Iterates over the top-level bindings of the chain.
    pub fn bindings(&self) -> Bindings<'_> {
        Bindings(self)
    }

    /// Every binder in the term: let labels and lambda parameters.
    pub fn binders(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let AnfTerm::Let(x, b, _) = t {
                out.push(x.clone());
                if let AnfBinding::Lam { param, .. } = b {
                    out.push(param.clone());
                }
            }
        });
        out
    }

    /// Calls `f` on this term and every nested sub-chain, outermost first.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a AnfTerm)) {
        let mut t = self;
        loop {
            f(t);
            match t {
                AnfTerm::Ret(_) => return,
                AnfTerm::Let(_, b, rest) => {
                    match b {
                        AnfBinding::Lam { body, .. } => body.visit(f),
                        AnfBinding::If(_, th, el) => {
                            th.visit(f);
                            el.visit(f);
                        }
                        _ => {}
                    }
                    t = rest;
                }
            }
        }
    }

    pub fn max_id(&self) -> u32 {
        let mut max = 0;
        self.visit(&mut |t| match t {
            AnfTerm::Ret(x) => max = max.max(x.id()),
            AnfTerm::Let(x, b, _) => {
                max = max.max(x.id());
                match b {
                    AnfBinding::Var(y) | AnfBinding::Assume(y) | AnfBinding::Weight(y) | AnfBinding::If(y, ..) => {
                        max = max.max(y.id())
                    }
                    AnfBinding::App(a, c) => max = max.max(a.id()).max(c.id()),
                    AnfBinding::Lam { param, .. } => max = max.max(param.id()),
                    AnfBinding::Const(_) => {}
                }
            }
        });
        max
    }

    /// Embeds the term back into the source language.
    pub fn to_source(&self) -> SourceTerm {
        match self {
            AnfTerm::Ret(x) => SourceTerm::Var(x.clone()),
            AnfTerm::Let(x, b, rest) => {
                let rest = rest.to_source();
                match b {
                    AnfBinding::Lam {
                        param,
                        body,
                        recursive: true,
                    } => SourceTerm::LetRec {
                        name: x.clone(),
                        param: param.clone(),
                        body: Box::new(body.to_source()),
                        rest: Box::new(rest),
                    },
                    other => SourceTerm::let_(x.clone(), binding_to_source(other), rest),
                }
            }
        }
    }
}

fn binding_to_source(b: &AnfBinding) -> SourceTerm {
    match b {
        AnfBinding::Var(y) => SourceTerm::Var(y.clone()),
        AnfBinding::Const(c) => SourceTerm::Const(c.clone()),
        AnfBinding::Lam { param, body, .. } => SourceTerm::lam(param.clone(), body.to_source()),
        AnfBinding::App(f, a) => SourceTerm::app(SourceTerm::Var(f.clone()), SourceTerm::Var(a.clone())),
        AnfBinding::If(c, t, e) => SourceTerm::if_(SourceTerm::Var(c.clone()), t.to_source(), e.to_source()),
        AnfBinding::Assume(y) => SourceTerm::Assume(Box::new(SourceTerm::Var(y.clone()))),
        AnfBinding::Weight(y) => SourceTerm::Weight(Box::new(SourceTerm::Var(y.clone()))),
    }
}

pub struct Bindings<'a>(&'a AnfTerm);

impl<'a> Iterator for Bindings<'a> {
    type Item = (&'a Ident, &'a AnfBinding);

    fn next(&mut self) -> Option<Self::Item> {
        match self.0 {
            AnfTerm::Ret(_) => None,
            AnfTerm::Let(x, b, rest) => {
                self.0 = rest;
                Some((x, b))
            }
        }
    }
}

/// The variable returned by `t`.
pub fn name(t: &AnfTerm) -> &Ident {
    t.name()
}

/// Converts a desugared, uniquified term to A-normal form.
///
/// Evaluation order is left to right, with `if` conditions evaluated before
/// either branch. A direct application of a lambda, `(lam x. b) a`, becomes
/// `let x = a in b`.
pub fn anf(t: &SourceTerm) -> AnfTerm {
    let mut n = Normalizer {
        ids: IdGen::after(t.max_id()),
        temps: 0,
    };
    n.tail(t)
}

struct Normalizer {
    ids: IdGen,
    temps: u32,
}

type Buffer = Vec<(Ident, AnfBinding)>;

fn close(buf: Buffer, ret: Ident) -> AnfTerm {
    buf.into_iter()
        .rev()
        .fold(AnfTerm::Ret(ret), |acc, (x, b)| AnfTerm::Let(x, b, Box::new(acc)))
}

impl Normalizer {
    fn temp(&mut self) -> Ident {
        self.temps += 1;
        self.ids.fresh(format!("%t{}", self.temps))
    }

    fn tail(&mut self, t: &SourceTerm) -> AnfTerm {
        let mut buf = Vec::new();
        let x = self.atom(t, &mut buf);
        close(buf, x)
    }

    /// Emits the bindings computing `t` and returns the variable holding it.
    fn atom(&mut self, t: &SourceTerm, buf: &mut Buffer) -> Ident {
        match t {
            SourceTerm::Var(x) => x.clone(),
            SourceTerm::Let(x, e1, e2) => {
                let b = self.binding(e1, buf);
                buf.push((x.clone(), b));
                self.atom(e2, buf)
            }
            SourceTerm::LetRec { .. } | SourceTerm::Seq(..) => {
                let rest = self.prefix(t, buf);
                self.atom(rest, buf)
            }
            SourceTerm::App(f, a) if matches!(**f, SourceTerm::Lam(..)) => {
                let rest = self.prefix(t, buf);
                self.atom(rest, buf)
            }
            _ => {
                let b = self.binding(t, buf);
                let x = self.temp();
                buf.push((x.clone(), b));
                x
            }
        }
    }

    /// Emits the leading binding of a let-like form and returns its body.
    fn prefix<'t>(&mut self, t: &'t SourceTerm, buf: &mut Buffer) -> &'t SourceTerm {
        match t {
            SourceTerm::LetRec {
                name,
                param,
                body,
                rest,
            } => {
                let body = self.tail(body);
                buf.push((
                    name.clone(),
                    AnfBinding::Lam {
                        param: param.clone(),
                        body: Box::new(body),
                        recursive: true,
                    },
                ));
                rest
            }
            SourceTerm::Seq(a, b) => {
                let bind = self.binding(a, buf);
                let wild = self.ids.fresh("_");
                buf.push((wild, bind));
                b
            }
            SourceTerm::App(f, a) => {
                let SourceTerm::Lam(x, body) = &**f else {
                    unreachable!("prefix called on a non-redex application")
                };
                let b = self.binding(a, buf);
                buf.push((x.clone(), b));
                body
            }
            _ => unreachable!("prefix called on a non-let form"),
        }
    }

    /// Emits prerequisite bindings and returns the binding computing `t`.
    fn binding(&mut self, t: &SourceTerm, buf: &mut Buffer) -> AnfBinding {
        match t {
            SourceTerm::Var(y) => AnfBinding::Var(y.clone()),
            SourceTerm::Const(c) => AnfBinding::Const(c.clone()),
            SourceTerm::Lam(p, body) => AnfBinding::Lam {
                param: p.clone(),
                body: Box::new(self.tail(body)),
                recursive: false,
            },
            SourceTerm::App(f, a) if !matches!(**f, SourceTerm::Lam(..)) => {
                let f = self.atom(f, buf);
                let a = self.atom(a, buf);
                AnfBinding::App(f, a)
            }
            SourceTerm::If(c, th, el) => {
                let c = self.atom(c, buf);
                AnfBinding::If(c, Box::new(self.tail(th)), Box::new(self.tail(el)))
            }
            SourceTerm::Assume(a) => AnfBinding::Assume(self.atom(a, buf)),
            SourceTerm::Weight(a) => AnfBinding::Weight(self.atom(a, buf)),
            SourceTerm::Let(x, e1, e2) => {
                let b = self.binding(e1, buf);
                buf.push((x.clone(), b));
                self.binding(e2, buf)
            }
            SourceTerm::LetRec { .. } | SourceTerm::Seq(..) | SourceTerm::App(..) => {
                let rest = self.prefix(t, buf);
                self.binding(rest, buf)
            }
        }
    }
}

/// Checks the A-normal-form invariants: every binder is distinct and every
/// variable reference is in scope (or listed in `free`).
pub fn check_anf(t: &AnfTerm, free: &[Ident]) -> Result<(), String> {
    let mut seen = HashSet::new();
    let mut scope: Vec<Ident> = free.to_vec();
    check(t, &mut seen, &mut scope)
}

fn check(t: &AnfTerm, seen: &mut HashSet<Ident>, scope: &mut Vec<Ident>) -> Result<(), String> {
    let mark = scope.len();
    let r = check_chain(t, seen, scope);
    scope.truncate(mark);
    r
}

fn check_chain(mut t: &AnfTerm, seen: &mut HashSet<Ident>, scope: &mut Vec<Ident>) -> Result<(), String> {
    let use_var = |x: &Ident, scope: &Vec<Ident>| {
        if scope.contains(x) {
            Ok(())
        } else {
            Err(format!("variable {x:?} used out of scope"))
        }
    };
    loop {
        match t {
            AnfTerm::Ret(x) => return use_var(x, scope),
            AnfTerm::Let(x, b, rest) => {
                if !seen.insert(x.clone()) {
                    return Err(format!("label {x:?} bound twice"));
                }
                match b {
                    AnfBinding::Var(y) | AnfBinding::Assume(y) | AnfBinding::Weight(y) => use_var(y, scope)?,
                    AnfBinding::Const(_) => {}
                    AnfBinding::App(f, a) => {
                        use_var(f, scope)?;
                        use_var(a, scope)?;
                    }
                    AnfBinding::If(c, th, el) => {
                        use_var(c, scope)?;
                        check(th, seen, scope)?;
                        check(el, seen, scope)?;
                    }
                    AnfBinding::Lam { param, body, recursive } => {
                        if !seen.insert(param.clone()) {
                            return Err(format!("parameter {param:?} bound twice"));
                        }
                        let mark = scope.len();
                        if *recursive {
                            scope.push(x.clone());
                        }
                        scope.push(param.clone());
                        check(body, seen, scope)?;
                        scope.truncate(mark);
                    }
                }
                scope.push(x.clone());
                t = rest;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::kernel::{alpha_eq, desugar};

    fn anf_of(src: &str) -> AnfTerm {
        anf(&desugar(&parse(src).unwrap()))
    }

    #[test]
    fn variable_is_already_normal() {
        let x = Ident::new("x", 1);
        assert_eq!(anf(&SourceTerm::Var(x.clone())), AnfTerm::Ret(x));
    }

    #[test]
    fn nested_application_binds_left_to_right() {
        let t = anf_of("lam f. lam a. lam b. f a b");
        let mut lam_body = &t;
        for _ in 0..3 {
            let AnfTerm::Let(_, AnfBinding::Lam { body, .. }, _) = lam_body else {
                panic!()
            };
            lam_body = body;
        }
        let bs: Vec<_> = lam_body.bindings().collect();
        assert_eq!(bs.len(), 2);
        let (t1, AnfBinding::App(f, a)) = bs[0] else { panic!() };
        assert_eq!((f.name(), a.name()), ("f", "a"));
        let (t2, AnfBinding::App(g, b)) = bs[1] else { panic!() };
        assert_eq!((g, b.name()), (t1, "b"));
        assert_eq!(lam_body.name(), t2);
    }

    #[test]
    fn let_of_constant_names_itself() {
        let t = anf_of("let a = 1 in a");
        assert!(matches!(&t, AnfTerm::Let(a, AnfBinding::Const(Intrinsic::Int(1)), rest)
            if a.name() == "a" && **rest == AnfTerm::Ret(a.clone())));
        assert_eq!(t.name().name(), "a");
    }

    #[test]
    fn sequencing_becomes_a_wildcard_let() {
        let t = anf_of("weight 0.5; ()");
        let bs: Vec<_> = t.bindings().collect();
        assert!(matches!(bs[1], (w, AnfBinding::Weight(_)) if w.name() == "_"));
    }

    #[test]
    fn output_is_well_formed_and_round_trips_to_source() {
        let src = "let a = assume (Beta 2. 2.) in
                   let rec iter = lam obs.
                     if null obs then () else
                       weight (pdfBernoulli a (head obs));
                       iter (tail obs)
                   in iter [true, true, false, true]; a";
        let desugared = desugar(&parse(src).unwrap());
        let t = anf(&desugared);
        check_anf(&t, &[]).unwrap();
        let back = t.to_source();
        assert!(crate::kernel::binders_unique(&back));
        assert!(alpha_eq(&desugar(&back), &desugar(&back)));
    }

    #[test]
    fn check_rejects_duplicate_labels() {
        let x = Ident::new("x", 1);
        let t = AnfTerm::Let(
            x.clone(),
            AnfBinding::Const(Intrinsic::Int(1)),
            Box::new(AnfTerm::Let(
                x.clone(),
                AnfBinding::Const(Intrinsic::Int(2)),
                Box::new(AnfTerm::Ret(x)),
            )),
        );
        assert!(check_anf(&t, &[]).is_err());
    }
}

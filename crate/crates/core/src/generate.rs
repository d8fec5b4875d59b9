//! Random well-typed programs for property tests. Every generated program
//! terminates: recursion only appears as a counter-bounded loop.

use rand::seq::IndexedRandom;
use rand::Rng;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ty {
    Real,
    Bool,
    /// real -> real
    Fun,
}

struct Gen<'r, R: Rng + ?Sized> {
    rng: &'r mut R,
    scope: Vec<(String, Ty)>,
    next: usize,
}

/// A random closed program of real type with at most `depth` levels of
/// nesting.
pub fn random_program<R: Rng + ?Sized>(rng: &mut R, depth: u32) -> String {
    let mut g = Gen {
        rng,
        scope: Vec::new(),
        next: 0,
    };
    g.real(depth)
}

impl<R: Rng + ?Sized> Gen<'_, R> {
    fn fresh(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}{}", self.next)
    }

    fn var(&mut self, ty: Ty) -> Option<String> {
        let candidates: Vec<&String> = self.scope.iter().filter(|(_, t)| *t == ty).map(|(x, _)| x).collect();
        candidates.choose(self.rng).map(|x| x.to_string())
    }

    fn literal(&mut self) -> String {
        let v: f64 = self.rng.random_range(-2.0..2.0);
        if v < 0.0 {
            format!("({v:.2})")
        } else {
            format!("{v:.2}")
        }
    }

    fn bind(&mut self, x: &str, ty: Ty, body: impl FnOnce(&mut Self) -> String) -> String {
        self.scope.push((x.to_string(), ty));
        let s = body(self);
        self.scope.pop();
        s
    }

    fn real(&mut self, depth: u32) -> String {
        if depth == 0 {
            return match self.var(Ty::Real) {
                Some(x) if self.rng.random_bool(0.6) => x,
                _ => self.literal(),
            };
        }
        let d = depth - 1;
        match self.rng.random_range(0..12) {
            0 => format!("({} + {})", self.real(d), self.real(d)),
            1 => format!("({} * {})", self.real(d), self.real(d)),
            2 => format!("(assume (Normal {} 1.))", self.real(d)),
            3 => ["(assume (Beta 2. 2.))", "(assume (Uniform 0. 1.))"]
                .choose(self.rng)
                .unwrap()
                .to_string(),
            4 => {
                let w = if self.rng.random_bool(0.5) {
                    format!("(pdfNormal {} 1. {})", self.real(d), self.real(d))
                } else {
                    format!("{:.2}", self.rng.random_range(0.1..2.0))
                };
                format!("(weight {w}; {})", self.real(d))
            }
            5 => format!("(if {} then {} else {})", self.boolean(d), self.real(d), self.real(d)),
            6 | 7 => {
                let ty = *[Ty::Real, Ty::Bool, Ty::Fun].choose(self.rng).unwrap();
                let x = self.fresh("v");
                let e1 = self.of(ty, d);
                let body = self.bind(&x, ty, |g| g.real(d));
                format!("(let {x} = {e1} in {body})")
            }
            8 => format!("({} {})", self.fun(d), self.real(d)),
            9 => {
                // higher-order: a function receiving a function
                let f = self.fresh("f");
                let body = self.bind(&f, Ty::Fun, |g| {
                    let a = g.real(d);
                    format!("{f} {a}")
                });
                format!("((lam {f}. {body}) {})", self.fun(d))
            }
            10 => {
                let lp = self.fresh("loop");
                let n = self.fresh("n");
                let acc = self.fresh("acc");
                let step = self.bind(&acc, Ty::Real, |g| g.real(d));
                let count = self.rng.random_range(0..4);
                format!(
                    "(let rec {lp} = lam {n}. lam {acc}. if {n} < 1 then {acc} else {lp} ({n} - 1) ({step}) in {lp} {count} {})",
                    self.real(d)
                )
            }
            _ => match self.var(Ty::Real) {
                Some(x) => x,
                None => self.literal(),
            },
        }
    }

    fn boolean(&mut self, depth: u32) -> String {
        if depth == 0 {
            return match self.var(Ty::Bool) {
                Some(x) if self.rng.random_bool(0.5) => x,
                _ => ["true", "false"].choose(self.rng).unwrap().to_string(),
            };
        }
        let d = depth - 1;
        match self.rng.random_range(0..4) {
            0 => "(assume (Bernoulli 0.5))".into(),
            1 => format!("({} < {})", self.real(d), self.real(d)),
            2 => format!(
                "(if {} then {} else {})",
                self.boolean(d),
                self.boolean(d),
                self.boolean(d)
            ),
            _ => self.boolean(0),
        }
    }

    fn fun(&mut self, depth: u32) -> String {
        let d = depth.saturating_sub(1);
        match self.rng.random_range(0..5) {
            0 | 1 => {
                let x = self.fresh("x");
                let body = self.bind(&x, Ty::Real, |g| g.real(d));
                format!("(lam {x}. {body})")
            }
            2 => format!("({} {})", ["add", "mul"].choose(self.rng).unwrap(), self.real(0)),
            3 if depth > 0 => format!("(if {} then {} else {})", self.boolean(d), self.fun(d), self.fun(d)),
            _ => match self.var(Ty::Fun) {
                Some(f) => f,
                None => "(add 1.)".into(),
            },
        }
    }

    fn of(&mut self, ty: Ty, depth: u32) -> String {
        match ty {
            Ty::Real => self.real(depth),
            Ty::Bool => self.boolean(depth),
            Ty::Fun => self.fun(depth),
        }
    }
}

use std::collections::HashMap;

use crate::cps::TargetTerm;
use crate::kernel::{Ident, Intrinsic};

use super::AnfTerm;

const INDENT: &str = "  ";

/// Renders an ANF term in the concrete syntax accepted by `parse`.
pub fn pretty_anf(t: &AnfTerm) -> String {
    pretty_target(&TargetTerm::from_anf(t))
}

/// Renders a target term. Suspension objects print as `Sus_assume(d, k)` and
/// `Sus_weight(w, k)`, CPS intrinsics with a `_cps` suffix.
pub fn pretty_target(t: &TargetTerm) -> String {
    let names = Names::collect(t);
    let mut out = String::new();
    for line in names.block(t) {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Prints a variable by name alone unless another variable shares its name.
struct Names {
    ambiguous: HashMap<String, bool>,
}

impl Names {
    fn collect(t: &TargetTerm) -> Self {
        let mut seen: HashMap<String, Vec<u32>> = HashMap::new();
        let mut note = |x: &Ident| {
            let ids = seen.entry(x.name().to_string()).or_default();
            if !ids.contains(&x.id()) {
                ids.push(x.id());
            }
        };
        t.walk(&mut |s| match s {
            TargetTerm::Var(x) => note(x),
            TargetTerm::Lam { param, .. } => note(param),
            TargetTerm::Let(x, ..) | TargetTerm::LetRec { name: x, .. } => note(x),
            _ => {}
        });
        Names {
            ambiguous: seen.into_iter().map(|(k, v)| (k, v.len() > 1)).collect(),
        }
    }

    fn show(&self, x: &Ident) -> String {
        if self.ambiguous.get(x.name()).copied().unwrap_or(false) {
            x.label()
        } else {
            x.name().to_string()
        }
    }

    fn atom(&self, t: &TargetTerm) -> Option<String> {
        match t {
            TargetTerm::Var(x) => Some(self.show(x)),
            TargetTerm::Const(c) => Some(constant(c)),
            TargetTerm::CpsConst(c) => Some(match c {
                Intrinsic::Fn { op, pending } if pending.is_empty() => format!("{}_cps", op.name()),
                other => format!("({other})_cps"),
            }),
            _ => None,
        }
    }

    fn block(&self, t: &TargetTerm) -> Vec<String> {
        if let Some(a) = self.atom(t) {
            return vec![a];
        }
        match t {
            TargetTerm::Lam { .. } => {
                let mut head = String::new();
                let mut cur = t;
                while let TargetTerm::Lam { param, body, .. } = cur {
                    if !head.is_empty() {
                        head.push(' ');
                    }
                    head.push_str(&format!("lam {}.", self.show(param)));
                    cur = body;
                }
                let body = self.block(cur);
                if body.len() == 1 {
                    vec![format!("{head} {}", body[0])]
                } else {
                    let mut out = vec![head];
                    out.extend(indent(body));
                    out
                }
            }
            TargetTerm::App(..) => {
                let mut spine = Vec::new();
                let mut cur = t;
                while let TargetTerm::App(f, a) = cur {
                    spine.push(&**a);
                    cur = f;
                }
                spine.push(cur);
                spine.reverse();
                let parts: Vec<Vec<String>> = spine.iter().map(|p| self.operand(p)).collect();
                if parts.iter().all(|p| p.len() == 1) {
                    vec![parts.iter().map(|p| p[0].as_str()).collect::<Vec<_>>().join(" ")]
                } else {
                    let mut out = parts[0].clone();
                    for p in &parts[1..] {
                        out.extend(indent(p.clone()));
                    }
                    out
                }
            }
            TargetTerm::Let(x, e1, e2) => {
                let mut out = self.binding(&format!("let {} =", self.show(x)), e1);
                out.extend(self.block(e2));
                out
            }
            TargetTerm::LetRec { name, value, rest } => {
                let mut out = self.binding(&format!("let rec {} =", self.show(name)), value);
                out.extend(self.block(rest));
                out
            }
            TargetTerm::If(c, th, el) => {
                let c = self.operand(c).join(" ");
                let th = self.block(th);
                let el = self.block(el);
                if th.len() == 1 && el.len() == 1 {
                    return vec![format!("if {c} then {} else {}", th[0], el[0])];
                }
                let mut out = vec![format!("if {c} then")];
                out.extend(indent(th));
                out.push("else".into());
                out.extend(indent(el));
                out
            }
            TargetTerm::Assume(a) => vec![format!("assume {}", self.operand(a).join(" "))],
            TargetTerm::Weight(a) => vec![format!("weight {}", self.operand(a).join(" "))],
            TargetTerm::SusAssume { dist, cont, .. } => self.suspension("Sus_assume", dist, cont),
            TargetTerm::SusWeight { weight, cont, .. } => self.suspension("Sus_weight", weight, cont),
            TargetTerm::Var(_) | TargetTerm::Const(_) | TargetTerm::CpsConst(_) => unreachable!(),
        }
    }

    fn operand(&self, t: &TargetTerm) -> Vec<String> {
        if let Some(a) = self.atom(t) {
            return vec![a];
        }
        let mut lines = self.block(t);
        lines[0] = format!("({}", lines[0]);
        if let Some(last) = lines.last_mut() {
            last.push(')');
        }
        lines
    }

    fn binding(&self, head: &str, e1: &TargetTerm) -> Vec<String> {
        let lines = self.block(e1);
        if lines.len() == 1 {
            return vec![format!("{head} {} in", lines[0])];
        }
        let mut out = Vec::new();
        if matches!(e1, TargetTerm::Lam { .. }) {
            out.push(format!("{head} {}", lines[0]));
            out.extend(lines[1..].iter().cloned());
        } else {
            out.push(head.to_string());
            out.extend(indent(lines));
        }
        out.push("in".into());
        out
    }

    fn suspension(&self, tag: &str, arg: &TargetTerm, cont: &TargetTerm) -> Vec<String> {
        let arg = self.operand(arg).join(" ");
        let k = self.block(cont);
        if k.len() == 1 {
            return vec![format!("{tag}({arg}, {})", k[0])];
        }
        let mut out = vec![format!("{tag}({arg}, {}", k[0])];
        out.extend(indent(k[1..].to_vec()));
        if let Some(last) = out.last_mut() {
            last.push(')');
        }
        out
    }
}

fn indent(lines: Vec<String>) -> Vec<String> {
    lines.into_iter().map(|l| format!("{INDENT}{l}")).collect()
}

fn constant(c: &Intrinsic) -> String {
    let s = c.to_string();
    let negative = matches!(c, Intrinsic::Int(n) if *n < 0) || matches!(c, Intrinsic::Real(r) if *r < 0.0);
    if negative {
        format!("({s})")
    } else {
        s
    }
}

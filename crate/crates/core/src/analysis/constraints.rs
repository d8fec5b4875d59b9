use std::collections::BTreeSet;
use std::fmt;

use crate::frontend::{AnfBinding, AnfTerm};
use crate::kernel::{arity, Ident};

use super::{AbstractValue, AnalysisConfig, AnalysisResult};

/// Constraints over the sets `S_x` and flags `suspend_x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// `a ∈ S_x`
    Member { value: AbstractValue, set: Ident },
    /// `S_from ⊆ S_to`
    Subset { from: Ident, to: Ident },
    /// `a1 ∈ S_watch ⇒ a2 ∈ S_set`
    CondMember {
        trigger: AbstractValue,
        watch: Ident,
        value: AbstractValue,
        set: Ident,
    },
    /// `suspend_x`
    Suspend(Ident),
    /// `suspend_from ⇒ suspend_to`
    SuspendImplies { from: Ident, to: Ident },
    /// `∀z ∀y. lam z. y ∈ S_lhs ⇒ S_rhs ⊆ S_z ∧ S_y ⊆ S_app`
    AppFlow { lhs: Ident, rhs: Ident, app: Ident },
    /// `∀y ∀n. const_y n ∈ S_lhs ∧ n > 1 ⇒ const_y (n-1) ∈ S_app`
    ConstArity { lhs: Ident, app: Ident },
    /// `∀y. lam y. _ ∈ S_lhs ⇒ (suspend_y ⇒ suspend_res)`
    LamSuspendToResult { lhs: Ident, res: Ident },
    /// `∀y. lam y. _ ∈ S_lhs ⇒ suspend_y`
    LamSuspendAll { lhs: Ident },
    /// `∀y. const_y _ ∈ S_lhs ⇒ (suspend_y ⇒ suspend_res)`
    ConstSuspendToResult { lhs: Ident, res: Ident },
    /// `∀y. const_y _ ∈ S_lhs ⇒ suspend_y`
    ConstSuspendAll { lhs: Ident },
    /// `suspend_res ⇒ (every closure and intrinsic in S_lhs suspends)`
    ResultSuspendsCallees { res: Ident, lhs: Ident },
}

impl Constraint {
    /// Whether `r` satisfies this constraint.
    pub fn holds(&self, r: &AnalysisResult) -> bool {
        let has = |x: &Ident, a: &AbstractValue| r.data.get(x).is_some_and(|s| s.contains(a));
        let subset = |x: &Ident, y: &Ident| r.data_of(x).all(|a| has(y, a));
        let lams = |lhs: &Ident| {
            r.data_of(lhs)
                .filter_map(|a| match a {
                    AbstractValue::Lam { param, ret } => Some((param.clone(), ret.clone())),
                    _ => None,
                })
                .collect::<Vec<_>>()
        };
        let consts = |lhs: &Ident| {
            r.data_of(lhs)
                .filter_map(|a| match a {
                    AbstractValue::Const { origin, arity } => Some((origin.clone(), *arity)),
                    _ => None,
                })
                .collect::<Vec<_>>()
        };
        match self {
            Constraint::Member { value, set } => has(set, value),
            Constraint::Subset { from, to } => subset(from, to),
            Constraint::CondMember {
                trigger,
                watch,
                value,
                set,
            } => !has(watch, trigger) || has(set, value),
            Constraint::Suspend(x) => r.suspends(x),
            Constraint::SuspendImplies { from, to } => !r.suspends(from) || r.suspends(to),
            Constraint::AppFlow { lhs, rhs, app } => lams(lhs).iter().all(|(z, y)| subset(rhs, z) && subset(y, app)),
            Constraint::ConstArity { lhs, app } => consts(lhs).iter().all(|(y, n)| {
                *n <= 1
                    || has(
                        app,
                        &AbstractValue::Const {
                            origin: y.clone(),
                            arity: n - 1,
                        },
                    )
            }),
            Constraint::LamSuspendToResult { lhs, res } => {
                lams(lhs).iter().all(|(y, _)| !r.suspends(y) || r.suspends(res))
            }
            Constraint::LamSuspendAll { lhs } => lams(lhs).iter().all(|(y, _)| r.suspends(y)),
            Constraint::ConstSuspendToResult { lhs, res } => {
                consts(lhs).iter().all(|(y, _)| !r.suspends(y) || r.suspends(res))
            }
            Constraint::ConstSuspendAll { lhs } => consts(lhs).iter().all(|(y, _)| r.suspends(y)),
            Constraint::ResultSuspendsCallees { res, lhs } => {
                !r.suspends(res) || r.data_of(lhs).all(|a| r.suspends(a.key()))
            }
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Member { value, set } => write!(f, "{value} ∈ S_{}", set.label()),
            Constraint::Subset { from, to } => write!(f, "S_{} ⊆ S_{}", from.label(), to.label()),
            Constraint::CondMember {
                trigger,
                watch,
                value,
                set,
            } => write!(f, "{trigger} ∈ S_{} ⇒ {value} ∈ S_{}", watch.label(), set.label()),
            Constraint::Suspend(x) => write!(f, "suspend_{}", x.label()),
            Constraint::SuspendImplies { from, to } => {
                write!(f, "suspend_{} ⇒ suspend_{}", from.label(), to.label())
            }
            Constraint::AppFlow { lhs, rhs, app } => write!(
                f,
                "∀z∀y. lam z. y ∈ S_{} ⇒ S_{} ⊆ S_z ∧ S_y ⊆ S_{}",
                lhs.label(),
                rhs.label(),
                app.label()
            ),
            Constraint::ConstArity { lhs, app } => write!(
                f,
                "∀y∀n. const_y n ∈ S_{} ∧ n > 1 ⇒ const_y n-1 ∈ S_{}",
                lhs.label(),
                app.label()
            ),
            Constraint::LamSuspendToResult { lhs, res } => write!(
                f,
                "∀y. lam y. _ ∈ S_{} ⇒ (suspend_y ⇒ suspend_{})",
                lhs.label(),
                res.label()
            ),
            Constraint::LamSuspendAll { lhs } => write!(f, "∀y. lam y. _ ∈ S_{} ⇒ suspend_y", lhs.label()),
            Constraint::ConstSuspendToResult { lhs, res } => write!(
                f,
                "∀y. const_y _ ∈ S_{} ⇒ (suspend_y ⇒ suspend_{})",
                lhs.label(),
                res.label()
            ),
            Constraint::ConstSuspendAll { lhs } => write!(f, "∀y. const_y _ ∈ S_{} ⇒ suspend_y", lhs.label()),
            Constraint::ResultSuspendsCallees { res, lhs } => write!(
                f,
                "suspend_{} ⇒ ∀y. (lam y. _ | const_y _) ∈ S_{} ⇒ suspend_y",
                res.label(),
                lhs.label()
            ),
        }
    }
}

/// Labels of the top-level bindings of `t` that may suspend: applications,
/// conditionals, and the enabled suspension sources.
pub fn suspend_names(t: &AnfTerm, cfg: AnalysisConfig) -> BTreeSet<Ident> {
    t.bindings()
        .filter(|(_, b)| match b {
            AnfBinding::App(..) | AnfBinding::If(..) => true,
            AnfBinding::Assume(_) => cfg.suspend_assume,
            AnfBinding::Weight(_) => cfg.suspend_weight,
            _ => false,
        })
        .map(|(x, _)| x.clone())
        .collect()
}

pub fn generate_constraints(t: &AnfTerm, cfg: AnalysisConfig) -> BTreeSet<Constraint> {
    let mut out = BTreeSet::new();
    generate(t, cfg, &mut out);
    out
}

fn generate(t: &AnfTerm, cfg: AnalysisConfig, out: &mut BTreeSet<Constraint>) {
    for (x, b) in t.bindings() {
        match b {
            AnfBinding::Var(y) => {
                out.insert(Constraint::Subset {
                    from: y.clone(),
                    to: x.clone(),
                });
            }
            AnfBinding::Const(c) => {
                let n = arity(c);
                if n > 0 {
                    out.insert(Constraint::Member {
                        value: AbstractValue::Const {
                            origin: x.clone(),
                            arity: n,
                        },
                        set: x.clone(),
                    });
                }
            }
            AnfBinding::Lam { param, body, .. } => {
                generate(body, cfg, out);
                out.insert(Constraint::Member {
                    value: AbstractValue::Lam {
                        param: param.clone(),
                        ret: body.name().clone(),
                    },
                    set: x.clone(),
                });
                for n in suspend_names(body, cfg) {
                    out.insert(Constraint::SuspendImplies {
                        from: n,
                        to: param.clone(),
                    });
                }
            }
            AnfBinding::App(lhs, rhs) => {
                out.insert(Constraint::AppFlow {
                    lhs: lhs.clone(),
                    rhs: rhs.clone(),
                    app: x.clone(),
                });
                out.insert(Constraint::ConstArity {
                    lhs: lhs.clone(),
                    app: x.clone(),
                });
                out.insert(Constraint::LamSuspendToResult {
                    lhs: lhs.clone(),
                    res: x.clone(),
                });
                out.insert(Constraint::ConstSuspendToResult {
                    lhs: lhs.clone(),
                    res: x.clone(),
                });
                out.insert(Constraint::ResultSuspendsCallees {
                    res: x.clone(),
                    lhs: lhs.clone(),
                });
            }
            AnfBinding::Assume(_) => {
                if cfg.suspend_assume {
                    out.insert(Constraint::Suspend(x.clone()));
                }
            }
            AnfBinding::Weight(_) => {
                if cfg.suspend_weight {
                    out.insert(Constraint::Suspend(x.clone()));
                }
            }
            AnfBinding::If(_, th, el) => {
                generate(th, cfg, out);
                generate(el, cfg, out);
                for branch in [th, el] {
                    out.insert(Constraint::Subset {
                        from: branch.name().clone(),
                        to: x.clone(),
                    });
                }
                for n in suspend_names(th, cfg).into_iter().chain(suspend_names(el, cfg)) {
                    out.insert(Constraint::SuspendImplies { from: n, to: x.clone() });
                }
            }
        }
    }
}

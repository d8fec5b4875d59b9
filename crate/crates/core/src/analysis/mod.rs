//! 0-CFA suspension analysis.
//!
//! Constraint generation walks an ANF program and emits flow and suspension
//! constraints; the worklist solver then computes the least `(data, suspend)`
//! assignment satisfying them.

mod constraints;
mod solver;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::frontend::{AnfBinding, AnfTerm};
use crate::kernel::Ident;

pub use constraints::{generate_constraints, suspend_names, Constraint};
pub use solver::{solve, solve_with, Order};

/// Which constructs are sources of suspension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnalysisConfig {
    pub suspend_assume: bool,
    pub suspend_weight: bool,
}

impl AnalysisConfig {
    pub const NONE: AnalysisConfig = AnalysisConfig {
        suspend_assume: false,
        suspend_weight: false,
    };
    pub const WEIGHT: AnalysisConfig = AnalysisConfig {
        suspend_assume: false,
        suspend_weight: true,
    };
    pub const ASSUME: AnalysisConfig = AnalysisConfig {
        suspend_assume: true,
        suspend_weight: false,
    };
    pub const BOTH: AnalysisConfig = AnalysisConfig {
        suspend_assume: true,
        suspend_weight: true,
    };
}

impl fmt::Display for AnalysisConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.suspend_assume, self.suspend_weight) {
            (false, false) => f.write_str("none"),
            (true, false) => f.write_str("assume"),
            (false, true) => f.write_str("weight"),
            (true, true) => f.write_str("assume,weight"),
        }
    }
}

/// Abstract closures `lam param. ret` and intrinsics `const origin arity`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbstractValue {
    Lam { param: Ident, ret: Ident },
    Const { origin: Ident, arity: usize },
}

impl AbstractValue {
    /// The parameter of an abstract closure or the origin of an intrinsic.
    pub fn key(&self) -> &Ident {
        match self {
            AbstractValue::Lam { param, .. } => param,
            AbstractValue::Const { origin, .. } => origin,
        }
    }
}

impl fmt::Display for AbstractValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractValue::Lam { param, ret } => write!(f, "lam {}. {}", param.label(), ret.label()),
            AbstractValue::Const { origin, arity } => write!(f, "const {} {}", origin.label(), arity),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("solver exceeded its work bound: {pops} worklist steps, bound {bound}")]
    WorkBound { pops: u64, bound: u64 },
}

/// The solved `(data, suspend)` pair. Variables without abstract values are
/// omitted from `data`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnalysisResult {
    pub data: BTreeMap<Ident, BTreeSet<AbstractValue>>,
    pub suspend: BTreeSet<Ident>,
}

impl AnalysisResult {
    pub fn data_of(&self, x: &Ident) -> impl Iterator<Item = &AbstractValue> {
        self.data.get(x).into_iter().flatten()
    }

    pub fn suspends(&self, x: &Ident) -> bool {
        self.suspend.contains(x)
    }

    /// Constraints from `cs` that this assignment does not satisfy.
    pub fn violations<'c>(&self, cs: impl IntoIterator<Item = &'c Constraint>) -> Vec<&'c Constraint> {
        cs.into_iter().filter(|c| !c.holds(self)).collect()
    }
}

/// Generates and solves the constraints of `t`.
pub fn analyze(t: &AnfTerm, cfg: AnalysisConfig) -> Result<AnalysisResult, AnalysisError> {
    solve(&generate_constraints(t, cfg))
}

/// Pairs `(application, callee)` where exactly one of the two is selected.
///
/// A selection is consistent for CPS when, for every application, either it
/// and every closure or intrinsic reaching its function position are
/// selected, or none of them are.
pub fn uniformity_violations(t: &AnfTerm, flow: &AnalysisResult, selected: &BTreeSet<Ident>) -> Vec<(Ident, Ident)> {
    let mut out = Vec::new();
    t.visit(&mut |s| {
        if let AnfTerm::Let(x, AnfBinding::App(lhs, _), _) = s {
            let app_in = selected.contains(x);
            for v in flow.data_of(lhs) {
                if selected.contains(v.key()) != app_in {
                    out.push((x.clone(), v.key().clone()));
                }
            }
        }
    });
    out
}

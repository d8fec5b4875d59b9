//! Selective CPS transformation of ANF programs into target terms with
//! suspension objects.

mod term;
mod transform;

pub use term::{LamKind, TargetTerm};
pub use transform::{all_labels, cps_unchecked, selective_cps, tail_call, CpsError, Vars};

#[cfg(test)]
mod tests;

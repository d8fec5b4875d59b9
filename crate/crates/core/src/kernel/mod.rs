//! Core syntax, intrinsics, and environments shared by every other module.

mod env;
mod ident;
pub mod intrinsic;
mod term;

pub use env::Env;
pub use ident::{IdGen, Ident};
pub use intrinsic::{arity, delta_apply, DeltaError, Dist, Intrinsic, List, Op};
pub use term::{alpha_eq, binders_unique, desugar, free_vars, SourceTerm};

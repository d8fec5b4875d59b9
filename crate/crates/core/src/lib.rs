//! A small probabilistic programming language with a suspension analysis,
//! selective CPS transformation, and Monte Carlo inference runtimes.

pub mod analysis;
pub mod corpus;
pub mod cps;
pub mod frontend;
pub mod generate;
pub mod inference;
pub mod interp;
pub mod kernel;
pub mod pipeline;

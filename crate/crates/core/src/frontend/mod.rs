//! Concrete syntax, A-normalization, and pretty printing.

mod anf;
mod lexer;
mod parser;
mod pretty;

use thiserror::Error;

pub use anf::{anf, check_anf, name, AnfBinding, AnfTerm, Bindings};
pub use parser::parse;
pub use pretty::{pretty_anf, pretty_target};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

//! The AuDaLa fragment: syntax tree, parser, pretty-printer and lowering.

pub mod ast;
mod lexer;
mod lower;
mod parser;
mod pretty;

use thiserror::Error;

pub use ast::*;
pub use lower::{lower, LowerError, LowerErrorKind, LoweredProgram, FLAG_PREFIX};
pub use parser::parse;
pub use pretty::{expr_to_string, pretty_print, schedule_to_string};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

/// Parses and lowers in one go.
pub fn load(source: &str) -> Result<LoweredProgram, LoadError> {
    Ok(lower(&parse(source)?)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Lower(#[from] LowerError),
}

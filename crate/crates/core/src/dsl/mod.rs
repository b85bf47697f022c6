//! The anti-pattern language: tokens, syntax tree, parser and printer.

pub mod ast;
mod lexer;
mod parser;
mod printer;

use std::fmt;

pub use ast::*;
pub use lexer::{tokenize, Tok, Token};
pub use parser::{parse_query, MAX_DEPTH};
pub use printer::pretty_print;

use crate::violation::Code;

/// First error found in a rule text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub code: Code,
    /// Byte offset into the source.
    pub offset: usize,
    /// 1-based line.
    pub line: usize,
    /// 1-based column, counted in characters.
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    pub(crate) fn at(
        src: &str,
        code: Code,
        offset: usize,
        expected: Vec<String>,
        found: String,
    ) -> Self {
        let before = &src[..offset.min(src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError {
            code,
            offset,
            line,
            column,
            expected,
            found,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}:{}: found {}", self.code, self.line, self.column, self.found)?;
        if !self.expected.is_empty() {
            write!(f, ", expected one of {}", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

//! Text formats for automata, CTL formulas, representative configurations
//! and concrete traces.

mod automaton;
mod config;
mod formula;
mod lexer;
mod trace;

use std::fmt;

pub use automaton::{parse_automaton, serialize_automaton};
pub use config::{parse_matrix, parse_repconfig, serialize_matrix, serialize_repconfig};
pub use formula::{parse_formula, serialize_formula};
pub use trace::{parse_trace, serialize_configuration, serialize_data_symbol, serialize_trace, Trace};

/// Position of a token in the input: 1-based line and column (in
/// characters) plus a byte range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub start: usize,
    pub end: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError { span, message: message.into(), expected: Vec::new() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

const KEYWORDS: &[&str] = &["true", "false", "EX", "EG", "EF", "AX", "AF", "AG", "E", "U"];

/// `p1`, `p2`, ... name parameters.
fn param_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('p')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

/// Whether `name` can name a register: not a formula keyword and not a
/// parameter.
pub fn is_reserved(name: &str) -> bool {
    KEYWORDS.contains(&name) || name.strip_prefix('p').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

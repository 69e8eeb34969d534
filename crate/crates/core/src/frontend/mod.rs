//! The `.cf` specification language: parsing, validation and desugaring.

pub mod ast;
mod desugar;
mod lexer;
mod parser;
pub mod printer;
mod validate;

use thiserror::Error;

pub use ast::{ParsedSpec, Pos};
pub use desugar::{desugar_floor_div, side_constraints};
pub use parser::{parse_formula, parse_spec};
pub use printer::print_spec;
pub use validate::{validate, validate_body, validate_ground};

use crate::spec::SystemSpec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("{pos}: syntax error: {message}{}", expected_list(.expected))]
    Syntax {
        pos: Pos,
        message: String,
        expected: Vec<String>,
    },
    #[error("{pos}: `{name}` is declared twice (first at {previous})")]
    DuplicateDeclaration {
        name: String,
        pos: Pos,
        previous: Pos,
    },
    #[error("{pos}: fragment violation in `{atom}`: {restriction}")]
    FragmentViolation {
        pos: Pos,
        atom: String,
        restriction: String,
    },
    #[error("{pos}: unknown symbol `{name}` ({context})")]
    UnknownSymbol {
        name: String,
        pos: Pos,
        context: String,
    },
    #[error("{pos}: sort mismatch: {message}")]
    SortMismatch { pos: Pos, message: String },
    #[error("{pos}: expected exactly one init case, found {count}")]
    MultipleInitCases { pos: Pos, count: usize },
    #[error("section `{section}` needs at least one item")]
    EmptySection { section: String },
    #[error("{pos}: divisor `{term}` must be a positive numeral")]
    NonConstantDivisor { pos: Pos, term: String },
    #[error("{pos}: division by zero")]
    ZeroDivisor { pos: Pos },
}

fn expected_list(e: &[String]) -> String {
    if e.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", e.join(", "))
    }
}

/// Parse, validate and desugar in one step.
pub fn load_spec(text: &str) -> Result<SystemSpec, SpecError> {
    let parsed = parse_spec(text)?;
    let spec = validate(&parsed)?;
    desugar_floor_div(&spec)
}

/// Parses and validates a case-body formula against `spec` (no desugaring).
pub fn parse_formula_in(spec: &SystemSpec, text: &str) -> Result<crate::logic::Formula, SpecError> {
    validate_body(spec, &parse_formula(text)?)
}

#[cfg(test)]
mod tests;

//! Lexing, parsing and validation of contract source text.

pub mod ast;
mod lexer;
mod objective;
mod parser;
mod pretty;
mod validate;

use thiserror::Error;

pub use ast::*;
pub use objective::{parse_objective, ObjExpr, Objective};
pub use parser::parse;
pub use pretty::{bexpr as render_bexpr, expr as render_expr, objective_expr as render_objective, pretty_print};
pub use validate::{validate, Diagnostic, Severity, ValidatedContract, MAX_TIME};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("{}:{}: {message}", span.line, span.col)]
    Lexical { span: Span, message: String },
    #[error("{}:{}: {message}", span.line, span.col)]
    Syntax { span: Span, message: String },
    #[error("{}:{}: duplicate declaration of '{name}'", span.line, span.col)]
    Duplicate { span: Span, name: String },
    #[error("objective: {0}")]
    Objective(String),
}

impl FrontendError {
    pub fn span(&self) -> Option<Span> {
        match self {
            FrontendError::Lexical { span, .. }
            | FrontendError::Syntax { span, .. }
            | FrontendError::Duplicate { span, .. } => Some(*span),
            FrontendError::Objective(_) => None,
        }
    }

    /// `file:line:col: message`.
    pub fn render(&self, file: &str) -> String {
        match self {
            FrontendError::Objective(m) => format!("{file}: objective: {m}"),
            other => format!("{file}:{other}"),
        }
    }
}

/// Parses and validates in one go.
pub fn load(src: &str) -> Result<ValidatedContract, LoadError> {
    let ast = parse(src).map_err(LoadError::Parse)?;
    validate(&ast).map_err(LoadError::Invalid)
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LoadError {
    #[error("parse error: {0}")]
    Parse(FrontendError),
    #[error("validation failed with {} diagnostic(s)", .0.len())]
    Invalid(Vec<Diagnostic>),
}

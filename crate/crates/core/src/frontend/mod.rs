//! The input language: lexing, parsing, elaboration to a [`Cfg`] and
//! pretty-printing.
//!
//! ```text
//! var x : f32 in [-1; 1];
//! var y : f32;
//! y = 0;
//! while (*) {
//!     input x in [-128; 128];
//!     if (x > y +@rm(up) 10) { y = y + 10; } else { y = x; }
//! }
//! ```

use std::fmt;

use crate::cfg::Cfg;
use crate::expr::Span;

pub mod ast;
mod elaborate;
mod lexer;
mod parser;
mod pretty;

pub use elaborate::elaborate;
pub use parser::parse;
pub use pretty::{exact_decimal, pretty, show_comparison, show_expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>, span: Span) -> Self {
        Diagnostic { severity: Severity::Error, message: message.into(), span }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {}: {}", self.span, sev, self.message)
    }
}

impl std::error::Error for Diagnostic {}

/// Parse and elaborate in one step.
pub fn compile(text: &str) -> Result<Cfg, Vec<Diagnostic>> {
    let program = parse(text).map_err(|d| vec![d])?;
    elaborate(&program)
}

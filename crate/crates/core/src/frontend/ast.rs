use crate::expr::{CmpOp, Span};
use crate::fp::{BinOp, ExactReal, FloatFormat, RoundingMode};

#[derive(Clone, Debug, PartialEq)]
pub struct SourceProgram {
    pub decls: Vec<Decl>,
    pub stmts: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub name: String,
    pub format: FloatFormat,
    pub range: Option<Range>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Range {
    pub lo: Literal,
    pub hi: Literal,
}

/// A numeric literal: its source text (sign included when folded) and value.
#[derive(Clone, Debug, PartialEq)]
pub struct Literal {
    pub text: String,
    pub value: ExactReal,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Assign { target: String, value: AstExpr, span: Span },
    If { cond: Cond, then_branch: Vec<Stmt>, else_branch: Vec<Stmt>, span: Span },
    While { cond: Cond, body: Vec<Stmt>, span: Span },
    Input { target: String, range: Range, span: Span },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cond {
    Compare { lhs: AstExpr, op: CmpOp, rhs: AstExpr },
    True,
    /// Nondeterministic choice, written `*`.
    Any,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AstExpr {
    Num(Literal),
    Var { name: String, span: Span },
    Neg { operand: Box<AstExpr>, span: Span },
    Binary { op: BinOp, rounding: RoundingMode, lhs: Box<AstExpr>, rhs: Box<AstExpr>, span: Span },
    Cast { format: FloatFormat, rounding: RoundingMode, operand: Box<AstExpr>, span: Span },
}

impl AstExpr {
    pub fn span(&self) -> Span {
        match self {
            AstExpr::Num(lit) => lit.span,
            AstExpr::Var { span, .. }
            | AstExpr::Neg { span, .. }
            | AstExpr::Binary { span, .. }
            | AstExpr::Cast { span, .. } => *span,
        }
    }
}

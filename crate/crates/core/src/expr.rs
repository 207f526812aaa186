//! Floating-point expressions and their concrete semantics.

use std::fmt;

use crate::fp::{op_round, round, round_f64, BinOp, ExactReal, FloatFormat, Omega, Outcome, RoundingMode};

/// Index of a program variable. Variables are numbered in declaration order,
/// which is also the summation order used by the abstract domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A source position: 1-based line and column plus the byte range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(line: u32, col: u32, start: usize, end: usize) -> Self {
        Span { line, col, start, end }
    }

    /// Smallest span covering both.
    pub fn to(self, other: Span) -> Span {
        let (first, last) = if self.start <= other.start { (self, other) } else { (other, self) };
        Span { line: first.line, col: first.col, start: first.start, end: last.end.max(first.end) }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A literal with its exact value and the roundings the analyses need.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    value: ExactReal,
    rounding: RoundingMode,
    concrete: Outcome,
    down: Outcome,
    up: Outcome,
}

impl Constant {
    pub fn new(format: FloatFormat, rounding: RoundingMode, value: ExactReal) -> Self {
        Constant {
            concrete: round(format, rounding, &value),
            down: round(format, RoundingMode::Down, &value),
            up: round(format, RoundingMode::Up, &value),
            value,
            rounding,
        }
    }

    pub fn value(&self) -> &ExactReal {
        &self.value
    }

    pub fn rounding(&self) -> RoundingMode {
        self.rounding
    }

    /// `const_{f,r}(c)` for the constant's own rounding mode.
    pub fn concrete(&self) -> Outcome {
        self.concrete
    }

    /// `const_{f,-∞}(c)`.
    pub fn down(&self) -> Outcome {
        self.down
    }

    /// `const_{f,+∞}(c)`.
    pub fn up(&self) -> Outcome {
        self.up
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Const(Constant),
    Var(VarId),
    /// Conversion of the operand into the node's format.
    Cast { operand: Box<Expr>, rounding: RoundingMode },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr>, rounding: RoundingMode },
    /// Exact negation.
    Neg(Box<Expr>),
}

/// An expression node tagged with its format and source span.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub format: FloatFormat,
    pub span: Span,
}

impl Expr {
    pub fn constant(format: FloatFormat, rounding: RoundingMode, value: ExactReal, span: Span) -> Self {
        Expr { kind: ExprKind::Const(Constant::new(format, rounding, value)), format, span }
    }

    pub fn var(format: FloatFormat, v: VarId, span: Span) -> Self {
        Expr { kind: ExprKind::Var(v), format, span }
    }

    pub fn cast(format: FloatFormat, rounding: RoundingMode, operand: Expr, span: Span) -> Self {
        Expr { kind: ExprKind::Cast { operand: Box::new(operand), rounding }, format, span }
    }

    /// Binary node; both operands must carry `format`.
    pub fn binary(op: BinOp, rounding: RoundingMode, lhs: Expr, rhs: Expr, span: Span) -> Self {
        assert_eq!(lhs.format, rhs.format, "operand formats differ");
        let format = lhs.format;
        Expr { kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), rounding }, format, span }
    }

    pub fn neg(operand: Expr, span: Span) -> Self {
        let format = operand.format;
        Expr { kind: ExprKind::Neg(Box::new(operand)), format, span }
    }

    /// Variables occurring in the expression, in occurrence order.
    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<VarId>) {
        match &self.kind {
            ExprKind::Const(_) => {}
            ExprKind::Var(v) => out.push(*v),
            ExprKind::Cast { operand, .. } | ExprKind::Neg(operand) => operand.collect_vars(out),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    /// Number of operator levels above the leaves.
    pub fn depth(&self) -> usize {
        match &self.kind {
            ExprKind::Const(_) | ExprKind::Var(_) => 0,
            ExprKind::Cast { operand, .. } | ExprKind::Neg(operand) => 1 + operand.depth(),
            ExprKind::Binary { lhs, rhs, .. } => 1 + lhs.depth().max(rhs.depth()),
        }
    }
}

/// Concrete evaluation in an environment indexed by [`VarId`]. Every value
/// in `env` must be a member of its variable's format.
pub fn eval_concrete(e: &Expr, env: &[f64]) -> Outcome {
    match &e.kind {
        ExprKind::Const(c) => c.concrete(),
        ExprKind::Var(v) => Ok(env[v.index()]),
        ExprKind::Cast { operand, rounding } => round_f64(e.format, *rounding, eval_concrete(operand, env)?),
        ExprKind::Binary { op, lhs, rhs, rounding } => {
            let a = eval_concrete(lhs, env)?;
            let b = eval_concrete(rhs, env)?;
            op_round(e.format, *rounding, *op, a, b)
        }
        ExprKind::Neg(operand) => Ok(-eval_concrete(operand, env)? + 0.0),
    }
}

/// Like [`eval_concrete`], but reports the span of the node that first
/// produced `Ω`.
pub fn eval_concrete_located(e: &Expr, env: &[f64]) -> Result<f64, (Span, Omega)> {
    match &e.kind {
        ExprKind::Const(c) => c.concrete().map_err(|k| (e.span, k)),
        ExprKind::Var(v) => Ok(env[v.index()]),
        ExprKind::Cast { operand, rounding } => {
            let x = eval_concrete_located(operand, env)?;
            round_f64(e.format, *rounding, x).map_err(|k| (e.span, k))
        }
        ExprKind::Binary { op, lhs, rhs, rounding } => {
            let a = eval_concrete_located(lhs, env)?;
            let b = eval_concrete_located(rhs, env)?;
            op_round(e.format, *rounding, *op, a, b).map_err(|k| (e.span, k))
        }
        ExprKind::Neg(operand) => Ok(-eval_concrete_located(operand, env)? + 0.0),
    }
}

/// Comparison operators of guards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    /// The complementary operator; exact since values are never NaN.
    pub fn negated(self) -> CmpOp {
        match self {
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Le => a <= b,
            CmpOp::Lt => a < b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

/// `lhs op rhs`, both sides in the same format.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl Comparison {
    pub fn new(lhs: Expr, op: CmpOp, rhs: Expr) -> Self {
        assert_eq!(lhs.format, rhs.format, "compared formats differ");
        Comparison { lhs, op, rhs }
    }

    pub fn negated(&self) -> Comparison {
        Comparison { lhs: self.lhs.clone(), op: self.op.negated(), rhs: self.rhs.clone() }
    }

    /// Concrete truth value; `Ω` if either side fails.
    pub fn eval_concrete(&self, env: &[f64]) -> Result<bool, (Span, Omega)> {
        let a = eval_concrete_located(&self.lhs, env)?;
        let b = eval_concrete_located(&self.rhs, env)?;
        Ok(self.op.holds(a, b))
    }
}

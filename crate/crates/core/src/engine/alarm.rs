use std::collections::BTreeMap;
use std::fmt;

use crate::expr::{Expr, ExprKind, Span};
use crate::fp::Omega;
use crate::frontend::show_expr;

/// A potential run-time error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alarm {
    pub line: u32,
    pub col: u32,
    pub kind: Omega,
    /// The failing subexpression in source syntax.
    pub expr: String,
    /// Analysis round in which the alarm was first raised.
    pub iteration: usize,
}

impl fmt::Display for Alarm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {} in `{}`", self.line, self.col, self.kind, self.expr)
    }
}

/// Collects alarms, deduplicated by location and kind.
#[derive(Clone, Debug)]
pub struct AlarmSink<'a> {
    names: &'a [String],
    round: usize,
    found: BTreeMap<(u32, u32, OmegaKey), Alarm>,
}

/// `Omega` ordered by its display name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct OmegaKey(u8);

fn key(k: Omega) -> OmegaKey {
    OmegaKey(match k {
        Omega::Overflow => 0,
        Omega::DivisionByZero => 1,
        Omega::InvalidOperation => 2,
    })
}

impl<'a> AlarmSink<'a> {
    pub fn new(names: &'a [String]) -> Self {
        AlarmSink { names, round: 0, found: BTreeMap::new() }
    }

    pub fn set_round(&mut self, round: usize) {
        self.round = round;
    }

    /// Record `kind` at `span`, a node of `root`.
    pub fn raise(&mut self, root: &Expr, span: Span, kind: Omega) {
        let round = self.round;
        let names = self.names;
        self.found.entry((span.line, span.col, key(kind))).or_insert_with(|| Alarm {
            line: span.line,
            col: span.col,
            kind,
            expr: find(root, span).map(|e| show_expr(e, names)).unwrap_or_default(),
            iteration: round,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.found.is_empty()
    }

    pub fn len(&self) -> usize {
        self.found.len()
    }

    pub fn clear(&mut self) {
        self.found.clear();
    }

    /// Alarms in source order.
    pub fn alarms(&self) -> Vec<Alarm> {
        self.found.values().cloned().collect()
    }

    /// Round in which an alarm at this place was first seen.
    pub fn first_seen(&self, a: &Alarm) -> Option<usize> {
        self.found.get(&(a.line, a.col, key(a.kind))).map(|b| b.iteration)
    }
}

/// The subexpression of `root` carrying `span`.
fn find(root: &Expr, span: Span) -> Option<&Expr> {
    if root.span == span {
        return Some(root);
    }
    match &root.kind {
        ExprKind::Const(_) | ExprKind::Var(_) => None,
        ExprKind::Cast { operand, .. } | ExprKind::Neg(operand) => find(operand, span),
        ExprKind::Binary { lhs, rhs, .. } => find(lhs, span).or_else(|| find(rhs, span)),
    }
}

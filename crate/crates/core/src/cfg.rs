//! Control-flow graphs of analyzed programs.

use std::fmt;

use crate::expr::{Comparison, Expr, ExprKind, Span, VarId};
use crate::fp::FloatFormat;
use crate::interval::{FloatInterval, IntervalEnv};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct VarInfo {
    pub name: String,
    pub format: FloatFormat,
    /// Range at program entry: the declared one, or the whole format.
    pub init: FloatInterval,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Guard {
    Compare(Comparison),
    /// Always passes (`true`, or either branch of `*`).
    Always,
    /// Never passes (the negation of `true`).
    Never,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    Assign(VarId, Expr),
    Guard(Guard),
    /// `v` receives an arbitrary value of the range.
    Input(VarId, FloatInterval),
    Skip,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub action: Action,
    /// Source position of the statement the edge comes from.
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cfg {
    pub vars: Vec<VarInfo>,
    pub node_count: usize,
    pub edges: Vec<Edge>,
    pub entry: NodeId,
    pub exit: NodeId,
}

impl Cfg {
    pub fn var_names(&self) -> Vec<String> {
        self.vars.iter().map(|v| v.name.clone()).collect()
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn initial_env(&self) -> IntervalEnv {
        IntervalEnv::new(self.vars.iter().map(|v| v.init).collect())
    }

    /// Indices of the edges entering each node.
    pub fn incoming(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.node_count];
        for (k, e) in self.edges.iter().enumerate() {
            inc[e.to].push(k);
        }
        inc
    }

    /// Indices of the edges leaving each node.
    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.node_count];
        for (k, e) in self.edges.iter().enumerate() {
            out[e.from].push(k);
        }
        out
    }

    /// The same graph with every source position erased, for structural
    /// comparisons.
    pub fn without_spans(&self) -> Cfg {
        let mut out = self.clone();
        for e in &mut out.edges {
            e.span = Span::default();
            match &mut e.action {
                Action::Assign(_, expr) => erase_spans(expr),
                Action::Guard(Guard::Compare(c)) => {
                    erase_spans(&mut c.lhs);
                    erase_spans(&mut c.rhs);
                }
                _ => {}
            }
        }
        out
    }
}

fn erase_spans(e: &mut Expr) {
    e.span = Span::default();
    match &mut e.kind {
        ExprKind::Const(_) | ExprKind::Var(_) => {}
        ExprKind::Cast { operand, .. } | ExprKind::Neg(operand) => erase_spans(operand),
        ExprKind::Binary { lhs, rhs, .. } => {
            erase_spans(lhs);
            erase_spans(rhs);
        }
    }
}

impl fmt::Display for Cfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.var_names();
        writeln!(f, "entry {} exit {}", self.entry, self.exit)?;
        for e in &self.edges {
            let label = match &e.action {
                Action::Assign(v, expr) => format!("{} = {}", names[v.index()], crate::frontend::show_expr(expr, &names)),
                Action::Guard(Guard::Compare(c)) => format!("guard {}", crate::frontend::show_comparison(c, &names)),
                Action::Guard(Guard::Always) => "guard true".to_string(),
                Action::Guard(Guard::Never) => "guard false".to_string(),
                Action::Input(v, iv) => format!("input {} in {}", names[v.index()], iv),
                Action::Skip => "skip".to_string(),
            };
            writeln!(f, "{} -> {}: {}", e.from, e.to, label)?;
        }
        Ok(())
    }
}

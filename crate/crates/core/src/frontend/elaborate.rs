use std::collections::HashMap;

use crate::cfg::{Action, Cfg, Edge, Guard, NodeId, VarInfo};
use crate::expr::{Comparison, Expr, Span, VarId};
use crate::fp::{FloatFormat, RoundingMode};
use crate::interval::FloatInterval;

use super::ast::{AstExpr, Cond, Range, SourceProgram, Stmt};
use super::Diagnostic;

/// Lower a parsed program to a control-flow graph. Node 0 is the entry and
/// has no incoming edge.
pub fn elaborate(p: &SourceProgram) -> Result<Cfg, Vec<Diagnostic>> {
    let mut el = Elaborator { names: HashMap::new(), vars: Vec::new(), edges: Vec::new(), nodes: 1, errors: Vec::new() };
    for d in &p.decls {
        if el.names.contains_key(&d.name) {
            el.errors.push(Diagnostic::error(format!("`{}` is declared twice", d.name), d.span));
            continue;
        }
        let init = match &d.range {
            Some(r) => match el.range(d.format, r, d.span) {
                Some(iv) => iv,
                None => continue,
            },
            None => FloatInterval::full(d.format),
        };
        el.names.insert(d.name.clone(), VarId(el.vars.len()));
        el.vars.push(VarInfo { name: d.name.clone(), format: d.format, init });
    }
    let exit = el.stmts(&p.stmts, 0);
    if !el.errors.is_empty() {
        return Err(el.errors);
    }
    Ok(Cfg { vars: el.vars, node_count: el.nodes, edges: el.edges, entry: 0, exit })
}

struct Elaborator {
    names: HashMap<String, VarId>,
    vars: Vec<VarInfo>,
    edges: Vec<Edge>,
    nodes: usize,
    errors: Vec<Diagnostic>,
}

type EResult<T> = Result<T, Diagnostic>;

impl Elaborator {
    fn node(&mut self) -> NodeId {
        self.nodes += 1;
        self.nodes - 1
    }

    fn edge(&mut self, from: NodeId, to: NodeId, action: Action, span: Span) {
        self.edges.push(Edge { from, to, action, span });
    }

    fn lookup(&self, name: &str, span: Span) -> EResult<VarId> {
        self.names.get(name).copied().ok_or_else(|| Diagnostic::error(format!("undeclared variable `{name}`"), span))
    }

    fn format_of(&self, v: VarId) -> FloatFormat {
        self.vars[v.index()].format
    }

    /// Range rounded outward into `format`.
    fn range(&mut self, format: FloatFormat, r: &Range, span: Span) -> Option<FloatInterval> {
        if r.lo.value > r.hi.value {
            self.errors.push(Diagnostic::error(format!("empty range [{}; {}]", r.lo.text, r.hi.text), r.lo.span.to(r.hi.span)));
            return None;
        }
        match FloatInterval::from_exact_bounds(format, &r.lo.value, &r.hi.value) {
            Ok(iv) => Some(iv),
            Err(_) => {
                self.errors.push(Diagnostic::error(format!("range [{}; {}] exceeds the {} format", r.lo.text, r.hi.text, format), span));
                None
            }
        }
    }

    fn stmts(&mut self, stmts: &[Stmt], mut cur: NodeId) -> NodeId {
        for s in stmts {
            cur = self.stmt(s, cur);
        }
        cur
    }

    fn stmt(&mut self, s: &Stmt, cur: NodeId) -> NodeId {
        match s {
            Stmt::Assign { target, value, span } => {
                let action = self.lookup(target, *span).and_then(|v| {
                    let f = self.format_of(v);
                    let e = self.expr(value, f)?;
                    if e.format != f {
                        let hint = f.name().map(|n| format!("; use cast_{n}")).unwrap_or_default();
                        return Err(Diagnostic::error(
                            format!("cannot assign a {} expression to `{target}` of format {f}{hint}", e.format),
                            value.span(),
                        ));
                    }
                    Ok(Action::Assign(v, e))
                });
                self.step(cur, action, *span)
            }
            Stmt::Input { target, range, span } => {
                let action = match self.lookup(target, *span) {
                    Ok(v) => match self.range(self.format_of(v), range, *span) {
                        Some(iv) => Ok(Action::Input(v, iv)),
                        None => Ok(Action::Skip),
                    },
                    Err(d) => Err(d),
                };
                self.step(cur, action, *span)
            }
            Stmt::If { cond, then_branch, else_branch, span } => {
                let (pos, neg) = self.guards(cond, *span);
                let then_start = self.node();
                let else_start = self.node();
                self.edge(cur, then_start, Action::Guard(pos), *span);
                self.edge(cur, else_start, Action::Guard(neg), *span);
                let then_end = self.stmts(then_branch, then_start);
                let else_end = self.stmts(else_branch, else_start);
                let join = self.node();
                self.edge(then_end, join, Action::Skip, *span);
                self.edge(else_end, join, Action::Skip, *span);
                join
            }
            Stmt::While { cond, body, span } => {
                let (pos, neg) = self.guards(cond, *span);
                let head = self.node();
                self.edge(cur, head, Action::Skip, *span);
                let body_start = self.node();
                self.edge(head, body_start, Action::Guard(pos), *span);
                let body_end = self.stmts(body, body_start);
                self.edge(body_end, head, Action::Skip, *span);
                let exit = self.node();
                self.edge(head, exit, Action::Guard(neg), *span);
                exit
            }
        }
    }

    fn step(&mut self, cur: NodeId, action: EResult<Action>, span: Span) -> NodeId {
        let action = action.unwrap_or_else(|d| {
            self.errors.push(d);
            Action::Skip
        });
        let next = self.node();
        self.edge(cur, next, action, span);
        next
    }

    /// The guard and its negation.
    fn guards(&mut self, cond: &Cond, span: Span) -> (Guard, Guard) {
        match cond {
            Cond::True => (Guard::Always, Guard::Never),
            Cond::Any => (Guard::Always, Guard::Always),
            Cond::Compare { lhs, op, rhs } => {
                let res = (|| {
                    let f = self.infer(lhs)?.or(self.infer(rhs)?).unwrap_or(FloatFormat::DOUBLE);
                    let l = self.expr(lhs, f)?;
                    let r = self.expr(rhs, f)?;
                    if l.format != r.format {
                        return Err(Diagnostic::error(format!("cannot compare {} with {}", l.format, r.format), span));
                    }
                    Ok(Comparison::new(l, *op, r))
                })();
                match res {
                    Ok(c) => {
                        let n = c.negated();
                        (Guard::Compare(c), Guard::Compare(n))
                    }
                    Err(d) => {
                        self.errors.push(d);
                        (Guard::Always, Guard::Always)
                    }
                }
            }
        }
    }

    /// Format fixed by the expression's variables and casts, if any.
    fn infer(&self, e: &AstExpr) -> EResult<Option<FloatFormat>> {
        Ok(match e {
            AstExpr::Num(_) => None,
            AstExpr::Var { name, span } => Some(self.format_of(self.lookup(name, *span)?)),
            AstExpr::Neg { operand, .. } => self.infer(operand)?,
            AstExpr::Binary { lhs, rhs, .. } => self.infer(lhs)?.or(self.infer(rhs)?),
            AstExpr::Cast { format, .. } => Some(*format),
        })
    }

    /// Elaborate `e`; constants take the format of their context, and `ctx`
    /// is used when nothing in `e` fixes one.
    fn expr(&self, e: &AstExpr, ctx: FloatFormat) -> EResult<Expr> {
        let f = self.infer(e)?.unwrap_or(ctx);
        match e {
            AstExpr::Num(lit) => Ok(Expr::constant(f, RoundingMode::NearestEven, lit.value.clone(), lit.span)),
            AstExpr::Var { name, span } => {
                let v = self.lookup(name, *span)?;
                Ok(Expr::var(self.format_of(v), v, *span))
            }
            AstExpr::Neg { operand, span } => Ok(Expr::neg(self.expr(operand, f)?, *span)),
            AstExpr::Binary { op, rounding, lhs, rhs, span } => {
                let l = self.expr(lhs, f)?;
                let r = self.expr(rhs, f)?;
                if l.format != r.format {
                    return Err(Diagnostic::error(
                        format!("operands of `{}` have formats {} and {}; insert an explicit cast", op.symbol(), l.format, r.format),
                        *span,
                    ));
                }
                Ok(Expr::binary(*op, *rounding, l, r, *span))
            }
            AstExpr::Cast { format, rounding, operand, span } => {
                let inner_ctx = self.infer(operand)?.unwrap_or(FloatFormat::DOUBLE);
                Ok(Expr::cast(*format, *rounding, self.expr(operand, inner_ctx)?, *span))
            }
        }
    }
}

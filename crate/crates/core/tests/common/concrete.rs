//! Exhaustive concrete execution of mini-format programs: every reachable
//! (node, memory) pair, with expressions evaluated by the oracle tables.

use std::collections::{BTreeSet, HashSet, VecDeque};

use fpoct::cfg::{Action, Cfg, Guard};
use fpoct::expr::{Expr, ExprKind};
use fpoct::fp::FloatFormat;

use super::suites::members;
use super::{Mini, OpTables};

/// Memories are vectors of mini indices.
pub type Memory = Vec<usize>;

pub struct Explored {
    /// Reachable memories of each node.
    pub states: Vec<HashSet<Memory>>,
    /// Source positions `(line, col)` of every operation that fails in
    /// some run.
    pub failures: BTreeSet<(u32, u32)>,
}

/// Evaluation that reports the position of the first failing node.
pub fn eval_located(e: &Expr, mem: &[usize]) -> Result<usize, (u32, u32)> {
    let m = Mini::get();
    let here = (e.span.line, e.span.col);
    match &e.kind {
        ExprKind::Const(c) => m.round(c.rounding(), c.value()).ok_or(here),
        ExprKind::Var(v) => Ok(mem[v.index()]),
        ExprKind::Neg(a) => eval_located(a, mem).map(|i| m.neg(i)),
        ExprKind::Binary { op, lhs, rhs, rounding } => {
            let a = eval_located(lhs, mem)?;
            let b = eval_located(rhs, mem)?;
            OpTables::get().at(*op, *rounding, a, b).ok_or(here)
        }
        ExprKind::Cast { operand, rounding } => {
            let a = eval_located(operand, mem)?;
            m.round(*rounding, &m.exact[a]).ok_or(here)
        }
    }
}

/// Explore every run of `cfg`, whose variables must all be in the mini
/// format. Panics past `limit` (node, memory) pairs.
pub fn explore(cfg: &Cfg, limit: usize) -> Explored {
    assert!(cfg.vars.iter().all(|v| v.format == FloatFormat::MINI), "mini programs only");
    let m = Mini::get();
    let out_edges = cfg.outgoing();
    let mut states = vec![HashSet::new(); cfg.node_count];
    let mut failures = BTreeSet::new();
    let mut work = VecDeque::new();
    let mut initial: Vec<Memory> = vec![Vec::new()];
    for v in &cfg.vars {
        initial = initial.iter().flat_map(|mem| members(&v.init).map(move |i| [mem.clone(), vec![i]].concat())).collect();
    }
    for mem in initial {
        if states[cfg.entry].insert(mem.clone()) {
            work.push_back((cfg.entry, mem));
        }
    }
    let mut seen = 0usize;
    while let Some((node, mem)) = work.pop_front() {
        seen += 1;
        assert!(seen <= limit, "more than {limit} concrete states");
        for &k in &out_edges[node] {
            let edge = &cfg.edges[k];
            let mut next: Vec<Memory> = Vec::new();
            match &edge.action {
                Action::Skip | Action::Guard(Guard::Always) => next.push(mem.clone()),
                Action::Guard(Guard::Never) => {}
                Action::Guard(Guard::Compare(c)) => match (eval_located(&c.lhs, &mem), eval_located(&c.rhs, &mem)) {
                    (Ok(a), Ok(b)) => {
                        if c.op.holds(m.values[a], m.values[b]) {
                            next.push(mem.clone());
                        }
                    }
                    (Err(at), _) | (_, Err(at)) => {
                        failures.insert(at);
                    }
                },
                Action::Assign(v, e) => match eval_located(e, &mem) {
                    Ok(i) => {
                        let mut n = mem.clone();
                        n[v.index()] = i;
                        next.push(n);
                    }
                    Err(at) => {
                        failures.insert(at);
                    }
                },
                Action::Input(v, iv) => {
                    for i in members(iv) {
                        let mut n = mem.clone();
                        n[v.index()] = i;
                        next.push(n);
                    }
                }
            }
            for n in next {
                if states[edge.to].insert(n.clone()) {
                    work.push_back((edge.to, n));
                }
            }
        }
    }
    Explored { states, failures }
}

//! Weak topological ordering (Bourdoncle's hierarchical decomposition).

use std::collections::BTreeSet;

use crate::cfg::{Cfg, NodeId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Component {
    Vertex(NodeId),
    /// A loop: its head and the components of its body.
    Cycle(NodeId, Vec<Component>),
}

impl Component {
    pub fn head(&self) -> NodeId {
        match self {
            Component::Vertex(v) | Component::Cycle(v, _) => *v,
        }
    }
}

/// The ordering of the nodes reachable from the entry. Successors are
/// explored in edge order, so the result is deterministic.
pub fn wto(cfg: &Cfg) -> Vec<Component> {
    let mut succ = vec![Vec::new(); cfg.node_count];
    for e in &cfg.edges {
        succ[e.from].push(e.to);
    }
    let mut b = Builder { succ, dfn: vec![0; cfg.node_count], stack: Vec::new(), num: 0 };
    let mut out = Vec::new();
    b.visit(cfg.entry, &mut out);
    out.reverse();
    out
}

/// Heads of all cycles, nested ones included. Every cycle of the graph
/// passes through at least one of them.
pub fn widening_points(components: &[Component]) -> BTreeSet<NodeId> {
    let mut out = BTreeSet::new();
    fn walk(cs: &[Component], out: &mut BTreeSet<NodeId>) {
        for c in cs {
            if let Component::Cycle(h, body) = c {
                out.insert(*h);
                walk(body, out);
            }
        }
    }
    walk(components, &mut out);
    out
}

struct Builder {
    succ: Vec<Vec<NodeId>>,
    dfn: Vec<usize>,
    stack: Vec<NodeId>,
    num: usize,
}

impl Builder {
    // Components are pushed in reverse order; callers reverse at the end.
    fn visit(&mut self, v: NodeId, partition: &mut Vec<Component>) -> usize {
        self.stack.push(v);
        self.num += 1;
        self.dfn[v] = self.num;
        let mut head = self.num;
        let mut is_loop = false;
        for k in 0..self.succ[v].len() {
            let w = self.succ[v][k];
            let min = if self.dfn[w] == 0 { self.visit(w, partition) } else { self.dfn[w] };
            if min <= head {
                head = min;
                is_loop = true;
            }
        }
        if head == self.dfn[v] {
            self.dfn[v] = usize::MAX;
            let mut element = self.stack.pop().expect("stack holds v");
            if is_loop {
                while element != v {
                    self.dfn[element] = 0;
                    element = self.stack.pop().expect("stack holds v");
                }
                partition.push(self.component(v));
            } else {
                partition.push(Component::Vertex(v));
            }
        }
        head
    }

    fn component(&mut self, v: NodeId) -> Component {
        let mut body = Vec::new();
        for k in 0..self.succ[v].len() {
            let w = self.succ[v][k];
            if self.dfn[w] == 0 {
                self.visit(w, &mut body);
            }
        }
        body.reverse();
        Component::Cycle(v, body)
    }
}

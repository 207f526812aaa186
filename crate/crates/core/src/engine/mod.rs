//! Fixpoint analysis of a [`Cfg`].
//!
//! Nodes are visited in a weak topological order. Loop heads accumulate the
//! states reaching them, first by joins, then by widening with thresholds
//! (perturbed in the octagon), until the accumulator is stable. A few
//! decreasing steps follow. A final round re-applies every transfer function
//! to check that the result is a post-fixpoint, and the alarms raised in that
//! round are the ones reported.

use std::collections::BTreeSet;
use std::fmt;

use crate::cfg::{Cfg, NodeId};
use crate::fp::pow2;
use crate::interval::Thresholds;

mod alarm;
mod state;
mod wto;

pub use alarm::{Alarm, AlarmSink};
pub use state::AbstractState;
pub use wto::{widening_points, wto, Component};

/// Which abstract domains take part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Intervals alone.
    Interval,
    /// Intervals refined by linear forms, with form propagation.
    IntervalLin,
    /// Intervals, linear forms and one octagon over all variables.
    Octagon,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Interval, Domain::IntervalLin, Domain::Octagon];

    pub fn name(self) -> &'static str {
        match self {
            Domain::Interval => "interval",
            Domain::IntervalLin => "interval+lin",
            Domain::Octagon => "octagon",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Domain::ALL.into_iter().find(|d| d.name() == name)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub domain: Domain,
    pub thresholds: Thresholds,
    /// Relative perturbation applied to widened and narrowed octagons.
    pub eps: f64,
    /// Rounds at one loop head before its accumulator is set to top.
    pub max_increasing: usize,
    pub max_decreasing: usize,
    /// Rounds at one loop head using plain joins before widening starts.
    pub widening_delay: usize,
    /// Rounds of threshold widening after the delay; later rounds widen
    /// straight to the format bounds.
    pub threshold_rounds: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            domain: Domain::Octagon,
            thresholds: Thresholds::ramp(),
            eps: pow2(-10),
            max_increasing: 200,
            max_decreasing: 5,
            widening_delay: 16,
            threshold_rounds: 24,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("eps must be a finite non-negative number")]
    BadEps,
    #[error("thresholds must be finite")]
    BadThreshold,
    #[error("max_increasing must be at least 1")]
    NoIncreasing,
}

impl SolverConfig {
    pub fn with_domain(domain: Domain) -> Self {
        SolverConfig { domain, ..SolverConfig::default() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(ConfigError::BadEps);
        }
        if self.thresholds.values().iter().any(|t| !t.is_finite()) {
            return Err(ConfigError::BadThreshold);
        }
        if self.max_increasing == 0 {
            return Err(ConfigError::NoIncreasing);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IterationCounts {
    /// Evaluations of loop heads while widening.
    pub increasing: usize,
    /// Decreasing steps applied.
    pub decreasing: usize,
    /// Most rounds one loop head needed to stabilize once. Reaching
    /// `max_increasing` means the cap replaced its invariant by top.
    pub peak: usize,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    /// Invariant of each node; `None` for unreachable nodes.
    pub states: Vec<Option<AbstractState>>,
    /// Alarms of the verification round, in source order.
    pub alarms: Vec<Alarm>,
    /// Whether re-applying every transfer function stayed within the result.
    pub certified: bool,
    pub iterations: IterationCounts,
    pub widening_points: BTreeSet<NodeId>,
}

impl Analysis {
    /// Per-node invariants in the octagon debug format.
    pub fn dump(&self, cfg: &Cfg) -> String {
        let names = cfg.var_names();
        let relational = self.states.iter().flatten().any(|s| s.oct.dim() > 0);
        let mut out = String::new();
        for (n, s) in self.states.iter().enumerate() {
            out.push_str(&format!("node {n}:\n"));
            match s {
                Some(s) => {
                    for line in s.dump(&names, relational).lines() {
                        out.push_str("  ");
                        out.push_str(line);
                        out.push('\n');
                    }
                }
                None => out.push_str("  unreachable\n"),
            }
        }
        out
    }
}

pub fn analyze(cfg: &Cfg, config: &SolverConfig) -> Analysis {
    let names = cfg.var_names();
    let order = wto(cfg);
    let mut solver = Solver {
        cfg,
        config,
        incoming: cfg.incoming(),
        init: AbstractState::initial(cfg, config.domain),
        states: vec![None; cfg.node_count],
        acc: vec![None; cfg.node_count],
        counts: IterationCounts::default(),
        history: AlarmSink::new(&names),
    };
    for c in &order {
        solver.component(c);
    }
    let (certified, alarms) = solver.verify(&order);
    let alarms = alarms
        .into_iter()
        .map(|mut a| {
            a.iteration = solver.history.first_seen(&a).unwrap_or(a.iteration);
            a
        })
        .collect();
    Analysis { states: solver.states, alarms, certified, iterations: solver.counts, widening_points: widening_points(&order) }
}

struct Solver<'a> {
    cfg: &'a Cfg,
    config: &'a SolverConfig,
    incoming: Vec<Vec<usize>>,
    init: Option<AbstractState>,
    states: Vec<Option<AbstractState>>,
    /// Unclosed widening accumulators of loop heads.
    acc: Vec<Option<AbstractState>>,
    counts: IterationCounts,
    /// Alarms of every round, to know when each was first raised.
    history: AlarmSink<'a>,
}

fn leq(a: &Option<AbstractState>, b: &Option<AbstractState>) -> bool {
    match (a, b) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(a), Some(b)) => a.leq(b),
    }
}

impl<'a> Solver<'a> {
    fn round(&self) -> usize {
        self.counts.increasing + self.counts.decreasing
    }

    /// Join of the transfers along the incoming edges of `n`.
    fn pre(&self, n: NodeId, sink: &mut AlarmSink) -> Option<AbstractState> {
        let domain = self.config.domain;
        let mut out = if n == self.cfg.entry { self.init.clone() } else { None };
        for &k in &self.incoming[n] {
            let e = &self.cfg.edges[k];
            let Some(s) = &self.states[e.from] else { continue };
            if let Some(t) = s.transfer(&e.action, domain, sink) {
                out = Some(match out {
                    Some(o) => o.join(&t),
                    None => t,
                });
            }
        }
        out
    }

    fn pre_logged(&mut self, n: NodeId) -> Option<AbstractState> {
        let mut sink = std::mem::replace(&mut self.history, AlarmSink::new(&[]));
        sink.set_round(self.round());
        let out = self.pre(n, &mut sink);
        self.history = sink;
        out
    }

    fn component(&mut self, c: &Component) {
        match c {
            Component::Vertex(v) => self.states[*v] = self.pre_logged(*v),
            Component::Cycle(h, body) => self.cycle(*h, body),
        }
    }

    fn set_head(&mut self, h: NodeId, acc: Option<AbstractState>, body: &[Component]) {
        self.states[h] = acc.clone().and_then(|s| s.normalize(self.config.domain));
        self.acc[h] = acc;
        for c in body {
            self.component(c);
        }
    }

    fn cycle(&mut self, h: NodeId, body: &[Component]) {
        let cfg = self.config;
        let mut rounds = 0;
        loop {
            let new = self.pre_logged(h);
            self.counts.increasing += 1;
            rounds += 1;
            self.counts.peak = self.counts.peak.max(rounds);
            let acc = self.acc[h].take();
            let next = match (acc, new) {
                (acc, None) => {
                    self.acc[h] = acc;
                    break;
                }
                (None, Some(n)) => n,
                (Some(a), Some(n)) => {
                    if n.leq(&a) {
                        self.acc[h] = Some(a);
                        break;
                    }
                    if rounds >= cfg.max_increasing {
                        AbstractState::top(self.cfg)
                    } else if rounds <= cfg.widening_delay {
                        a.join(&n)
                    } else if rounds <= cfg.widening_delay + cfg.threshold_rounds {
                        a.widen(&n, &cfg.thresholds, cfg.eps, cfg.domain)
                    } else {
                        a.widen(&n, &Thresholds::default(), cfg.eps, cfg.domain)
                    }
                }
            };
            self.set_head(h, Some(next), body);
        }

        // Decreasing steps, each kept only if it is still a post-fixpoint.
        let mut prev: Option<Option<AbstractState>> = None;
        let mut steps = 0;
        loop {
            let new = self.pre_logged(h);
            let acc = self.acc[h].clone();
            if !leq(&new, &acc) {
                if let Some(p) = prev {
                    self.set_head(h, p, body);
                }
                break;
            }
            if steps == cfg.max_decreasing {
                break;
            }
            let Some(a) = &acc else { break };
            let cand = new.as_ref().and_then(|n| a.narrow(n, cfg.eps, cfg.domain));
            if cand == acc {
                break;
            }
            steps += 1;
            self.counts.decreasing += 1;
            prev = Some(acc);
            self.set_head(h, cand, body);
        }
    }

    /// Re-apply every transfer once, collecting alarms, and check that no
    /// state grows.
    fn verify(&mut self, order: &[Component]) -> (bool, Vec<Alarm>) {
        let names = self.cfg.var_names();
        let mut sink = AlarmSink::new(&names);
        sink.set_round(self.round());
        let mut nodes = Vec::new();
        flatten(order, &mut nodes);
        let mut certified = true;
        for n in nodes {
            let new = self.pre(n, &mut sink);
            let claimed = if self.acc[n].is_some() { &self.acc[n] } else { &self.states[n] };
            if !leq(&new, claimed) {
                certified = false;
            }
        }
        (certified, sink.alarms())
    }
}

fn flatten(cs: &[Component], out: &mut Vec<NodeId>) {
    for c in cs {
        out.push(c.head());
        if let Component::Cycle(_, body) = c {
            flatten(body, out);
        }
    }
}

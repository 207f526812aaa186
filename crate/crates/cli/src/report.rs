//! The analysis report, as text and as JSON.
//!
//! The JSON document is described in `crates/cli/SCHEMA.md`. The structs
//! below are its definition: they deserialize with `deny_unknown_fields`,
//! which the schema tests rely on.

use std::fmt::Write as _;

use fpoct::cfg::Cfg;
use fpoct::engine::{Analysis, AbstractState};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub program: String,
    pub config: ConfigEcho,
    pub alarms: Vec<AlarmEntry>,
    pub certified: bool,
    pub iterations: Iterations,
    /// Wall-clock time of the analysis. The only non-deterministic field.
    pub timing: Timing,
    /// Variable ranges at the program exit; `None` when the exit is
    /// unreachable or the program could not be analyzed.
    pub ranges: Option<Vec<VarRange>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariants: Option<Vec<NodeInvariant>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<ErrorEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub domain: String,
    /// `builtin` or the path of the thresholds file.
    pub thresholds: String,
    pub eps: f64,
    pub max_iter: usize,
    pub max_narrow: usize,
    pub widening_delay: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlarmEntry {
    pub line: u32,
    pub col: u32,
    pub kind: String,
    pub expr: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Iterations {
    pub increasing: usize,
    pub decreasing: usize,
    pub peak: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub analysis_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarRange {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeInvariant {
    pub node: usize,
    pub reachable: bool,
    pub ranges: Vec<VarRange>,
    /// Constraints `±x ±y <= c` tighter than what `ranges` imply.
    pub constraints: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorEntry {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl Report {
    /// A report for a program that was not analyzed.
    pub fn failed(program: String, config: ConfigEcho, errors: Vec<ErrorEntry>) -> Self {
        Report {
            program,
            config,
            alarms: Vec::new(),
            certified: false,
            iterations: Iterations::default(),
            timing: Timing::default(),
            ranges: None,
            invariants: None,
            errors,
        }
    }

    pub fn from_analysis(program: String, config: ConfigEcho, cfg: &Cfg, a: &Analysis, invariants: bool, ms: f64) -> Self {
        let names = cfg.var_names();
        let alarms = a
            .alarms
            .iter()
            .map(|al| AlarmEntry { line: al.line, col: al.col, kind: al.kind.to_string(), expr: al.expr.clone() })
            .collect();
        let invariants = invariants.then(|| {
            a.states
                .iter()
                .enumerate()
                .map(|(node, s)| NodeInvariant {
                    node,
                    reachable: s.is_some(),
                    ranges: s.as_ref().map(|s| ranges(s, &names)).unwrap_or_default(),
                    constraints: s.as_ref().map(|s| relations(s, &names)).unwrap_or_default(),
                })
                .collect()
        });
        Report {
            program,
            config,
            alarms,
            certified: a.certified,
            iterations: Iterations { increasing: a.iterations.increasing, decreasing: a.iterations.decreasing, peak: a.iterations.peak },
            timing: Timing { analysis_ms: ms },
            ranges: a.states[cfg.exit].as_ref().map(|s| ranges(s, &names)),
            invariants,
            errors: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The human-readable report. Everything but the `time:` line is
    /// deterministic.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "program: {}", self.program);
        let _ = writeln!(
            out,
            "config: domain={} thresholds={} eps={} max-iter={} max-narrow={} widening-delay={}",
            c.domain, c.thresholds, c.eps, c.max_iter, c.max_narrow, c.widening_delay
        );
        for e in &self.errors {
            let _ = writeln!(out, "error: {}:{}: {}", e.line, e.col, e.message);
        }
        let _ = writeln!(out, "alarms: {}", self.alarms.len());
        for a in &self.alarms {
            let _ = writeln!(out, "  {}:{}: {} in `{}`", a.line, a.col, a.kind, a.expr);
        }
        let _ = writeln!(out, "certified: {}", if self.certified { "yes" } else { "no" });
        let it = &self.iterations;
        let _ = writeln!(out, "iterations: {} increasing, {} decreasing, peak {}", it.increasing, it.decreasing, it.peak);
        let _ = writeln!(out, "time: {:.3} ms", self.timing.analysis_ms);
        match &self.ranges {
            Some(rs) => {
                out.push_str("ranges at exit:\n");
                for r in rs {
                    let _ = writeln!(out, "  {} in [{}; {}]", r.name, show(r.lo), show(r.hi));
                }
            }
            None if self.errors.is_empty() => out.push_str("exit unreachable\n"),
            None => {}
        }
        if let Some(inv) = &self.invariants {
            out.push_str("invariants:\n");
            for n in inv {
                if !n.reachable {
                    let _ = writeln!(out, "  node {}: unreachable", n.node);
                    continue;
                }
                let _ = writeln!(out, "  node {}:", n.node);
                for r in &n.ranges {
                    let _ = writeln!(out, "    {} in [{}; {}]", r.name, show(r.lo), show(r.hi));
                }
                for c in &n.constraints {
                    let _ = writeln!(out, "    {c}");
                }
            }
        }
        out
    }
}

fn show(x: f64) -> String {
    fpoct::interval::show_f64(x)
}

fn ranges(s: &AbstractState, names: &[String]) -> Vec<VarRange> {
    s.intervals.iter().map(|(v, iv)| VarRange { name: names[v.index()].clone(), lo: iv.lo(), hi: iv.hi() }).collect()
}

fn relations(s: &AbstractState, names: &[String]) -> Vec<String> {
    s.oct.relations(names, &s.intervals)
}

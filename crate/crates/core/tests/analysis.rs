//! Whole-program properties: soundness against exhaustive concrete
//! execution, certificates, and behaviour on the bundled corpus.

mod common;

use std::collections::BTreeSet;

use common::concrete::explore;
use common::suites::Tally;
use common::{affine_contains, Mini};
use fpoct::cfg::Cfg;
use fpoct::engine::{analyze, AbstractState, AlarmSink, Analysis, Domain, SolverConfig};
use fpoct::expr::VarId;
use fpoct::frontend::compile;
use fpoct::octagon::Term;

/// Small mini-format programs whose runs can be enumerated.
const MINI_PROGRAMS: &[(&str, &str)] = &[
    (
        "counter",
        "var x : mini in [0; 0];
         var y : mini in [1; 2];
         while (x < 40) {
             x = x + y;
             if (x > 30) { y = y * 2; }
         }",
    ),
    (
        "filter",
        "var u : mini in [0; 0];
         var s : mini in [0; 0];
         while (*) {
             input u in [-2; 2];
             s = 0.5 * s + u;
         }",
    ),
    (
        "limiter",
        "var x : mini in [0; 0];
         var d : mini in [0; 0];
         var y : mini in [0; 0];
         var s : mini in [0; 0];
         var r : mini in [0; 0];
         while (*) {
             input x in [1; 4];
             input d in [0.5; 1];
             s = y;
             r = x - s;
             y = x;
             if (r <= -d) { y = s - d; }
             if (r >= d) { y = s + d; }
             // forget the temporaries so that runs can be enumerated
             x = 0; d = 0; s = 0; r = 0;
         }",
    ),
    (
        "division",
        "var a : mini in [0; 0];
         var b : mini in [0; 0];
         var c : mini in [0; 0];
         input a in [-4; 4];
         input b in [-1; 1];
         if (b > 0.25) { c = a / b; } else { c = a * b; }
         c = c / b;
         c = c *@rm(up) 16;",
    ),
    (
        "nested",
        "var i : mini in [0; 0];
         var j : mini in [0; 0];
         var t : mini in [0; 0];
         while (i < 6) {
             j = 0;
             while (j < i) {
                 t = t +@rm(down) j;
                 j = j + 1;
             }
             i = i + 1;
         }",
    ),
    (
        "sums",
        "var a : mini in [-3; 3];
         var b : mini in [8; 12];
         var c : mini in [0; 0];
         c = a + b;
         if (c - a <= 10) {
             c = c -@rm(z) b;
         } else {
             c = (b - a) * (b + a);
         }
         while (c < 100) { c = c * 2 + a; }",
    ),
];

fn terms(n: usize) -> Vec<Term> {
    (0..n).flat_map(|v| [Term::Pos(VarId(v)), Term::Neg(VarId(v))]).collect()
}

/// Every concrete memory must be described by the analysis at its node,
/// and every concrete failure must be alarmed.
fn check_against_runs(name: &str, cfg: &Cfg, a: &Analysis, domain: Domain) -> Tally {
    let m = Mini::get();
    let runs = explore(cfg, 3_000_000);
    let mut t = Tally::default();
    let alarmed: BTreeSet<(u32, u32)> = a.alarms.iter().map(|al| (al.line, al.col)).collect();
    for at in &runs.failures {
        t.cases += 1;
        if !alarmed.contains(at) {
            t.missed_omega += 1;
            t.first_failure.get_or_insert_with(|| format!("{name}/{domain}: failure at {at:?} not alarmed"));
        }
    }
    let n = cfg.vars.len();
    for (node, mems) in runs.states.iter().enumerate() {
        if mems.is_empty() {
            continue;
        }
        let Some(s) = &a.states[node] else {
            t.violations += 1;
            t.first_failure.get_or_insert_with(|| format!("{name}/{domain}: node {node} reachable but marked dead"));
            continue;
        };
        for mem in mems {
            t.cases += 1;
            let x: Vec<f64> = mem.iter().map(|&i| m.values[i]).collect();
            let mut bad = Vec::new();
            for (v, iv) in s.intervals.iter() {
                if !iv.contains_value(x[v.index()]) {
                    bad.push(format!("{} outside {iv}", x[v.index()]));
                }
            }
            if domain == Domain::Octagon {
                let ts = terms(n);
                let val = |t: Term| match t {
                    Term::Pos(v) => x[v.index()],
                    Term::Neg(v) => -x[v.index()],
                };
                for (k, &p) in ts.iter().enumerate() {
                    if val(p) > s.oct.bound(p, None) {
                        bad.push(format!("{p:?} > {}", s.oct.bound(p, None)));
                    }
                    for &r in &ts[k..] {
                        // sums of two mini values are exact in double
                        if val(p) + val(r) > s.oct.bound(p, Some(r)) {
                            bad.push(format!("{p:?} + {r:?} > {}", s.oct.bound(p, Some(r))));
                        }
                    }
                }
            }
            for (v, l) in s.forms.iter() {
                let c = l.const_part();
                let coeffs: Vec<((f64, f64), f64)> = l.coeffs().map(|(w, k)| ((k.lo(), k.hi()), x[w.index()])).collect();
                if !affine_contains((c.lo(), c.hi()), &coeffs, x[v.index()]) {
                    bad.push(format!("v{} outside its form {l}", v.index()));
                }
            }
            if !bad.is_empty() {
                t.violations += 1;
                t.first_failure.get_or_insert_with(|| format!("{name}/{domain}: node {node}, memory {x:?}: {}", bad.join(", ")));
            }
        }
    }
    t
}

#[test]
fn analyses_contain_every_concrete_run() {
    for (name, src) in MINI_PROGRAMS {
        let cfg = compile(src).unwrap_or_else(|e| panic!("{name}: {e:?}"));
        for domain in Domain::ALL {
            for eps in [SolverConfig::default().eps, 0.0] {
                let a = analyze(&cfg, &SolverConfig { eps, ..SolverConfig::with_domain(domain) });
                let t = check_against_runs(name, &cfg, &a, domain);
                assert!(t.ok(), "{t}");
            }
        }
    }
}

#[test]
fn mini_programs_exercise_failures_and_loops() {
    // the suite would be vacuous without concrete failures to find
    let mut failing = 0;
    for (_, src) in MINI_PROGRAMS {
        let runs = explore(&compile(src).unwrap(), 3_000_000);
        failing += !runs.failures.is_empty() as usize;
    }
    assert!(failing >= 2, "{failing}");
}

fn corpus() -> Vec<(String, Cfg)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut out: Vec<(String, Cfg)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "fga"))
        .map(|p| {
            let src = std::fs::read_to_string(&p).unwrap();
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let cfg = compile(&src).unwrap_or_else(|e| panic!("{name}: {e:?}"));
            (name, cfg)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Re-apply every transfer function to the result, independently of the
/// solver's own verification round.
fn is_post_fixpoint(cfg: &Cfg, a: &Analysis, domain: Domain) -> bool {
    let names = cfg.var_names();
    let mut sink = AlarmSink::new(&names);
    let init = AbstractState::initial(cfg, domain);
    let entry_ok = match (&init, &a.states[cfg.entry]) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(i), Some(s)) => i.leq(s),
    };
    entry_ok
        && cfg.edges.iter().all(|e| {
            let Some(from) = &a.states[e.from] else { return true };
            match (from.transfer(&e.action, domain, &mut sink), &a.states[e.to]) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(post), Some(to)) => post.leq(to),
            }
        })
}

#[test]
fn corpus_results_are_certified_post_fixpoints() {
    for (name, cfg) in corpus() {
        for domain in Domain::ALL {
            let a = analyze(&cfg, &SolverConfig::with_domain(domain));
            assert!(a.certified, "{name}/{domain}");
            assert!(is_post_fixpoint(&cfg, &a, domain), "{name}/{domain}");
        }
    }
}

#[test]
fn corpus_heads_stabilize_below_the_cap() {
    for (name, cfg) in corpus() {
        for domain in Domain::ALL {
            let config = SolverConfig::with_domain(domain);
            let a = analyze(&cfg, &config);
            assert!(a.iterations.peak < config.max_increasing, "{name}/{domain}: {:?}", a.iterations);
        }
    }
}

#[test]
fn more_domains_never_add_alarms() {
    for (name, cfg) in corpus() {
        let alarms = |d: Domain| -> BTreeSet<(u32, u32, String)> {
            analyze(&cfg, &SolverConfig::with_domain(d)).alarms.iter().map(|a| (a.line, a.col, a.kind.to_string())).collect()
        };
        let (i, l, o) = (alarms(Domain::Interval), alarms(Domain::IntervalLin), alarms(Domain::Octagon));
        assert!(l.is_subset(&i), "{name}: {l:?} vs {i:?}");
        assert!(o.is_subset(&l), "{name}: {o:?} vs {l:?}");
    }
}

#[test]
fn analysis_is_deterministic() {
    for (name, cfg) in corpus() {
        let a = analyze(&cfg, &SolverConfig::default());
        let b = analyze(&cfg, &SolverConfig::default());
        assert_eq!(a.states, b.states, "{name}");
        assert_eq!(a.alarms, b.alarms, "{name}");
    }
}

//! The exhaustive and differential suites behind the acceptance target.
//! Each returns counts so callers can both assert and report.

use std::fmt;
use std::sync::OnceLock;

use fpoct::expr::{Expr, ExprKind, Span, VarId};
use fpoct::fp::{parse_exact, BinOp, FloatFormat, RoundingMode};
use fpoct::interval::{eval_interval, FloatInterval, IntervalEnv};
use fpoct::linear::{linearize, LinearFormEnv};
use fpoct::octagon::{Octagon, Term};
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use super::{affine_contains, q, q_int, rng, Mini, OpTables};

const MINI: FloatFormat = FloatFormat::MINI;

#[derive(Clone, Debug, Default)]
pub struct Tally {
    pub cases: u64,
    pub violations: u64,
    pub missed_omega: u64,
    /// Abstract `Ω` where no concrete run fails: imprecision, not unsoundness.
    pub spurious_omega: u64,
    pub first_failure: Option<String>,
}

impl Tally {
    pub fn ok(&self) -> bool {
        self.violations == 0 && self.missed_omega == 0
    }

    fn fail(&mut self, missed: bool, what: impl FnOnce() -> String) {
        if missed {
            self.missed_omega += 1;
        } else {
            self.violations += 1;
        }
        if self.first_failure.is_none() {
            self.first_failure = Some(what());
        }
    }
}

impl fmt::Display for Tally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} cases, {} containment violations, {} missed Ω, {} spurious Ω",
            self.cases, self.violations, self.missed_omega, self.spurious_omega
        )?;
        if let Some(first) = &self.first_failure {
            write!(f, "; first: {first}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Interval operators

/// Indices of mini values used as interval bounds by the default sweep:
/// every fifth member plus the values around zero, one, the normal range
/// boundary and the format bounds.
pub fn bound_subset() -> Vec<usize> {
    let m = Mini::get();
    let n = m.len();
    let mut out: Vec<usize> = (0..n).step_by(5).collect();
    let special = [0.0, 2f64.powi(-9), 7.0 * 2f64.powi(-9), 2f64.powi(-6), 0.5, 1.0, 1.125, 2.0, 3.0, 15.0, 16.0, 224.0, 240.0];
    for x in special {
        out.push(m.index_of(x));
        out.push(m.neg(m.index_of(x)));
    }
    out.sort();
    out.dedup();
    out
}

/// Concrete results of `a op b` over a rectangle of operand indices,
/// merged over the four rounding modes.
#[derive(Clone, Copy)]
struct Agg {
    min: i16,
    max: i16,
    omega: bool,
}

const EMPTY: Agg = Agg { min: i16::MAX, max: -1, omega: false };

impl Agg {
    fn merge(self, o: Agg) -> Agg {
        Agg { min: self.min.min(o.min), max: self.max.max(o.max), omega: self.omega || o.omega }
    }
}

fn merged_table(op: BinOp) -> Vec<Agg> {
    let m = Mini::get();
    let t = OpTables::get();
    let n = m.len();
    let mut out = vec![EMPTY; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut g = EMPTY;
            for r in RoundingMode::ALL {
                match t.at(op, r, a, b) {
                    Some(k) => {
                        g.min = g.min.min(k as i16);
                        g.max = g.max.max(k as i16);
                    }
                    None => g.omega = true,
                }
            }
            out[a * n + b] = g;
        }
    }
    out
}

/// Every pair of intervals whose bounds are drawn from `bounds` (sorted
/// indices), for the four operations, against the enumerated concrete
/// outcomes of all operand values in all rounding modes.
pub fn interval_sweep(bounds: &[usize]) -> Tally {
    let m = Mini::get();
    let n = m.len();
    let mut tally = Tally::default();
    let iv = |i: usize, j: usize| FloatInterval::new(m.values[i], m.values[j], MINI);
    for op in BinOp::ALL {
        let table = merged_table(op);
        for (ai, &alo) in bounds.iter().enumerate() {
            // column aggregates over the rows alo..=ahi, grown with ahi
            let mut cols = vec![EMPTY; n];
            let mut next_row = alo;
            for &ahi in &bounds[ai..] {
                while next_row <= ahi {
                    for y in 0..n {
                        cols[y] = cols[y].merge(table[next_row * n + y]);
                    }
                    next_row += 1;
                }
                let a = iv(alo, ahi);
                for (bi, &blo) in bounds.iter().enumerate() {
                    let mut acc = EMPTY;
                    let mut next_col = blo;
                    for &bhi in &bounds[bi..] {
                        while next_col <= bhi {
                            acc = acc.merge(cols[next_col]);
                            next_col += 1;
                        }
                        check_pair(&mut tally, op, a, iv(blo, bhi), acc);
                    }
                }
            }
        }
    }
    tally
}

/// All pairs of point intervals.
pub fn point_sweep() -> Tally {
    let m = Mini::get();
    let mut tally = Tally::default();
    for op in BinOp::ALL {
        let table = merged_table(op);
        for a in 0..m.len() {
            for b in 0..m.len() {
                let (x, y) = (FloatInterval::point(m.values[a], MINI), FloatInterval::point(m.values[b], MINI));
                check_pair(&mut tally, op, x, y, table[a * m.len() + b]);
            }
        }
    }
    tally
}

fn check_pair(tally: &mut Tally, op: BinOp, a: FloatInterval, b: FloatInterval, concrete: Agg) {
    let m = Mini::get();
    tally.cases += 1;
    match a.apply(op, &b) {
        Ok(r) => {
            if concrete.omega {
                tally.fail(true, || format!("{a} {op:?} {b} = {r}, but some operands fail"));
            } else if m.values[concrete.min as usize] < r.lo() || m.values[concrete.max as usize] > r.hi() {
                let (lo, hi) = (m.values[concrete.min as usize], m.values[concrete.max as usize]);
                tally.fail(false, || format!("{a} {op:?} {b} = {r}, concrete [{lo}; {hi}]"));
            }
        }
        Err(_) if !concrete.omega => tally.spurious_omega += 1,
        Err(_) => {}
    }
}

// ---------------------------------------------------------------------------
// Expressions

pub const X: VarId = VarId(0);
pub const Y: VarId = VarId(1);

/// Intervals each variable ranges over: near one, around zero, mid-range,
/// negative, and touching the overflow limit.
pub fn env_grid() -> Vec<FloatInterval> {
    [(1.0, 1.5), (-2f64.powi(-7), 2f64.powi(-7)), (12.0, 16.0), (-3.0, -2.0), (192.0, 240.0)]
        .into_iter()
        .map(|(lo, hi)| FloatInterval::new(lo, hi, MINI))
        .collect()
}

fn leaves(r: RoundingMode) -> Vec<Expr> {
    let s = Span::default();
    vec![Expr::var(MINI, X, s), Expr::var(MINI, Y, s), Expr::constant(MINI, r, parse_exact("3").unwrap(), s)]
}

/// All expressions over `X`, `Y` and the constant 3 with at most two
/// operator levels, every operation rounded with `r`.
pub fn expressions(r: RoundingMode) -> Vec<Expr> {
    let s = Span::default();
    let base = leaves(r);
    let mut level1 = base.clone();
    for a in &base {
        level1.push(Expr::neg(a.clone(), s));
        for b in &base {
            for op in BinOp::ALL {
                level1.push(Expr::binary(op, r, a.clone(), b.clone(), s));
            }
        }
    }
    let mut out = level1.clone();
    for a in &level1 {
        if a.depth() == 1 {
            out.push(Expr::neg(a.clone(), s));
        }
        for b in &level1 {
            if a.depth() == 1 || b.depth() == 1 {
                for op in BinOp::ALL {
                    out.push(Expr::binary(op, r, a.clone(), b.clone(), s));
                }
            }
        }
    }
    out
}

/// [`expressions`], built once per rounding mode.
pub fn expression_set(r: RoundingMode) -> &'static [Expr] {
    static SETS: [OnceLock<Vec<Expr>>; 4] = [const { OnceLock::new() }; 4];
    let i = RoundingMode::ALL.iter().position(|&m| m == r).unwrap();
    SETS[i].get_or_init(|| expressions(r))
}

/// Concrete evaluation by the oracle tables; `None` is `Ω`. `point` holds
/// mini indices.
pub fn eval_oracle(e: &Expr, point: &[usize]) -> Option<usize> {
    let m = Mini::get();
    match &e.kind {
        ExprKind::Const(c) => m.round(c.rounding(), c.value()),
        ExprKind::Var(v) => Some(point[v.index()]),
        ExprKind::Neg(a) => eval_oracle(a, point).map(|i| m.neg(i)),
        ExprKind::Binary { op, lhs, rhs, rounding } => {
            let a = eval_oracle(lhs, point)?;
            let b = eval_oracle(rhs, point)?;
            OpTables::get().at(*op, *rounding, a, b)
        }
        ExprKind::Cast { operand, rounding } => {
            assert_eq!(operand.format, MINI, "the oracle only knows the mini format");
            let a = eval_oracle(operand, point)?;
            m.round(*rounding, &m.exact[a])
        }
    }
}

/// Mini indices of the members of `iv`.
pub fn members(iv: &FloatInterval) -> std::ops::RangeInclusive<usize> {
    let m = Mini::get();
    m.index_of(iv.lo())..=m.index_of(iv.hi())
}

/// Check interval evaluation and linearization of `e` against every
/// concrete point of `env`.
pub fn check_expression(tally: &mut Tally, e: &Expr, env: &IntervalEnv) {
    let m = Mini::get();
    let vars: Vec<FloatInterval> = env.iter().map(|(_, iv)| iv).collect();
    let abs = eval_interval(e, env);
    let lin = linearize(e, env, &LinearFormEnv::new()).ok();
    let terms_of = |point: &[usize]| -> Vec<((f64, f64), f64)> {
        lin.as_ref()
            .map(|l| l.coeffs().map(|(v, c)| ((c.lo(), c.hi()), m.values[point[v.index()]])).collect())
            .unwrap_or_default()
    };
    let mut point = vec![0usize; vars.len()];
    let mut any_omega = false;
    let mut visit = |point: &[usize]| {
        tally.cases += 1;
        let concrete = eval_oracle(e, point);
        let Some(k) = concrete else {
            any_omega = true;
            if abs.is_ok() {
                tally.fail(true, || format!("{e:?} at {point:?}: concrete Ω, abstract {:?}", abs));
            }
            return;
        };
        let value = m.values[k];
        if let Ok(iv) = &abs {
            if !iv.contains_value(value) {
                tally.fail(false, || format!("{e:?} at {point:?}: {value} outside {iv}"));
            }
            // the form is only claimed when the evaluation cannot fail
            if let Some(l) = &lin {
                let c = l.const_part();
                if !affine_contains((c.lo(), c.hi()), &terms_of(point), value) {
                    tally.fail(false, || format!("{e:?} at {point:?}: {value} outside the form {l}"));
                }
            }
        }
    };
    enumerate(&vars, 0, &mut point, &mut visit);
    if abs.is_err() && !any_omega {
        tally.spurious_omega += 1;
    }
}

fn enumerate(vars: &[FloatInterval], k: usize, point: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if k == vars.len() {
        visit(point);
        return;
    }
    for i in members(&vars[k]) {
        point[k] = i;
        enumerate(vars, k + 1, point, visit);
    }
}

/// Every expression with at most two operator levels, in every rounding
/// mode, over every pair of grid intervals.
pub fn expression_sweep() -> (Tally, usize) {
    let grid = env_grid();
    let mut tally = Tally::default();
    let mut count = 0;
    for r in RoundingMode::ALL {
        let exprs = expressions(r);
        count += exprs.len();
        for ix in &grid {
            for iy in &grid {
                let env = IntervalEnv::new(vec![*ix, *iy]);
                for e in &exprs {
                    check_expression(&mut tally, e, &env);
                }
            }
        }
    }
    (tally, count)
}

// ---------------------------------------------------------------------------
// Octagon closure

/// A constraint `a + b <= c` (or `a <= c`) over signed variables.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub a: Term,
    pub b: Option<Term>,
    pub c: f64,
}

fn term_index(t: Term) -> usize {
    match t {
        Term::Pos(v) => 2 * v.index(),
        Term::Neg(v) => 2 * v.index() + 1,
    }
}

fn term_value(t: Term, p: &[f64]) -> f64 {
    match t {
        Term::Pos(v) => p[v.index()],
        Term::Neg(v) => -p[v.index()],
    }
}

/// Exact value of the left-hand side of `k` at `p`.
fn lhs_exact(k: &Constraint, p: &[f64]) -> BigRational {
    let mut s = q(term_value(k.a, p));
    if let Some(b) = k.b {
        s += q(term_value(b, p));
    }
    s
}

/// Strong closure over the rationals: full Floyd–Warshall on the `2n`
/// signed variables, then one strengthening pass. `None` when empty.
/// `m[i][j]` bounds `V_i - V_j`.
pub struct ExactOctagon {
    pub n: usize,
    pub m: Vec<Vec<Option<BigRational>>>,
}

impl ExactOctagon {
    pub fn from_constraints(n: usize, cs: &[Constraint]) -> ExactOctagon {
        let dim = 2 * n;
        let mut m: Vec<Vec<Option<BigRational>>> = vec![vec![None; dim]; dim];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Some(BigRational::zero());
        }
        let mut tighten = |i: usize, j: usize, c: BigRational| {
            if m[i][j].as_ref().is_none_or(|old| &c < old) {
                m[i][j] = Some(c);
            }
        };
        for k in cs {
            let i = term_index(k.a);
            match k.b {
                Some(b) => {
                    let j = term_index(b);
                    // a + b = V_i - V_(j^1) = V_j - V_(i^1)
                    tighten(i, j ^ 1, q(k.c));
                    tighten(j, i ^ 1, q(k.c));
                }
                None => tighten(i, i ^ 1, q(k.c) * q_int(2)),
            }
        }
        ExactOctagon { n, m }
    }

    /// Closure; `false` when the constraints are unsatisfiable.
    pub fn close(&mut self) -> bool {
        let dim = 2 * self.n;
        let m = &mut self.m;
        for k in 0..dim {
            for i in 0..dim {
                let Some(ik) = m[i][k].clone() else { continue };
                for j in 0..dim {
                    if let Some(kj) = &m[k][j] {
                        let s = &ik + kj;
                        if m[i][j].as_ref().is_none_or(|old| &s < old) {
                            m[i][j] = Some(s);
                        }
                    }
                }
            }
        }
        if (0..dim).any(|i| m[i][i].as_ref().is_some_and(|d| d < &BigRational::zero())) {
            return false;
        }
        let half = q(0.5);
        let snapshot = m.clone();
        for i in 0..dim {
            for j in 0..dim {
                if let (Some(a), Some(b)) = (&snapshot[i][i ^ 1], &snapshot[j ^ 1][j]) {
                    let s = (a + b) * &half;
                    if m[i][j].as_ref().is_none_or(|old| &s < old) {
                        m[i][j] = Some(s);
                    }
                }
            }
        }
        true
    }

    /// Upper bound of `a + b`, or of `a`.
    pub fn bound(&self, a: Term, b: Option<Term>) -> Option<BigRational> {
        let i = term_index(a);
        match b {
            Some(b) => self.m[i][term_index(b) ^ 1].clone(),
            None => self.m[i][i ^ 1].as_ref().map(|c| c * q(0.5)),
        }
    }
}

pub fn all_queries(n: usize) -> Vec<(Term, Option<Term>)> {
    let terms: Vec<Term> = (0..n).flat_map(|v| [Term::Pos(VarId(v)), Term::Neg(VarId(v))]).collect();
    let mut out = Vec::new();
    for (k, &a) in terms.iter().enumerate() {
        out.push((a, None));
        for &b in &terms[k..] {
            out.push((a, Some(b)));
        }
    }
    out
}

/// A random dyadic number: mostly small multiples of 1/8, sometimes a
/// full-width mantissa so that closure sums must round.
fn dyadic(g: &mut impl Rng) -> f64 {
    if g.gen_bool(0.7) {
        g.gen_range(-64i32..=64) as f64 / 8.0
    } else {
        let mant = g.gen_range(1u64..(1u64 << 53)) as f64;
        let sign = if g.gen_bool(0.5) { 1.0 } else { -1.0 };
        sign * mant * 2f64.powi(g.gen_range(-60..=-50))
    }
}

fn random_term(g: &mut impl Rng, n: usize) -> Term {
    let v = VarId(g.gen_range(0..n));
    if g.gen_bool(0.5) {
        Term::Pos(v)
    } else {
        Term::Neg(v)
    }
}

/// Random constraints, mostly satisfied by a hidden point so that the
/// octagon is usually non-empty. Returns the point too.
pub fn random_octagon(g: &mut impl Rng, n: usize) -> (Vec<Constraint>, Vec<f64>) {
    let hidden: Vec<f64> = (0..n).map(|_| g.gen_range(-32i32..=32) as f64 / 8.0).collect();
    let count = g.gen_range(1..=3 * n * n);
    let mut cs = Vec::new();
    for _ in 0..count {
        let a = random_term(g, n);
        let b = if g.gen_bool(0.3) { None } else { Some(random_term(g, n)) };
        let at_hidden = term_value(a, &hidden) + b.map_or(0.0, |b| term_value(b, &hidden));
        // slack is usually non-negative; a few constraints cut the point off
        let c = if g.gen_bool(0.9) { at_hidden + dyadic(g).abs() } else { dyadic(g) };
        cs.push(Constraint { a, b, c });
    }
    (cs, hidden)
}

#[derive(Clone, Debug, Default)]
pub struct ClosureTally {
    pub octagons: u64,
    pub empty: u64,
    pub entries: u64,
    /// Entries where the float bound equals the exact one.
    pub exact_entries: u64,
    /// Entries whose float bound is further than rounding slack from the
    /// exact one (`+∞` included): sound, but a closure that missed a path.
    pub loose_entries: u64,
    pub points: u64,
    pub violations: u64,
    pub first_failure: Option<String>,
}

impl ClosureTally {
    fn fail(&mut self, what: impl FnOnce() -> String) {
        self.violations += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(what());
        }
    }
}

impl fmt::Display for ClosureTally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} octagons ({} empty), {} entries ({} exact, {} loose), {} sampled points, {} violations",
            self.octagons, self.empty, self.entries, self.exact_entries, self.loose_entries, self.points, self.violations
        )?;
        if let Some(first) = &self.first_failure {
            write!(f, "; first: {first}")?;
        }
        Ok(())
    }
}

/// Float closure against exact closure on `count` random octagons of up to
/// six variables, plus point sampling around each hidden point.
pub fn closure_differential(count: usize, seed: u64) -> ClosureTally {
    let mut g = rng(seed);
    let mut t = ClosureTally::default();
    for case in 0..count {
        let n = g.gen_range(1..=6);
        let (cs, hidden) = random_octagon(&mut g, n);
        let mut o = Octagon::top(n);
        for k in &cs {
            o.add_constraint(k.a, k.b, k.c);
        }
        let closed = o.close();
        let mut exact = ExactOctagon::from_constraints(n, &cs);
        let satisfiable = exact.close();
        t.octagons += 1;
        if !satisfiable {
            t.empty += 1;
            continue;
        }
        if closed.is_bottom() {
            t.fail(|| format!("case {case}: float closure is empty, exact is not: {cs:?}"));
            continue;
        }
        for (a, b) in all_queries(n) {
            t.entries += 1;
            let got = closed.bound(a, b);
            match exact.bound(a, b) {
                None => {
                    if got != f64::INFINITY {
                        t.fail(|| format!("case {case}: {a:?}+{b:?} bounded by {got}, exact is unbounded"));
                    } else {
                        t.exact_entries += 1;
                    }
                }
                Some(e) => {
                    if got == f64::INFINITY {
                        t.loose_entries += 1;
                    } else if q(got) < e {
                        t.fail(|| format!("case {case}: {a:?}+{b:?} float {got} < exact {e}"));
                    } else if q(got) == e {
                        t.exact_entries += 1;
                    } else if q(got) - &e > q(2f64.powi(-40)) * (q(got.abs()) + q(1.0)) {
                        t.loose_entries += 1;
                    }
                }
            }
        }
        // Points near the hidden one: members of the original octagon must
        // satisfy the float closure, and exactly the exact closure.
        let closed_cs: Vec<Constraint> =
            all_queries(n).into_iter().map(|(a, b)| Constraint { a, b, c: closed.bound(a, b) }).collect();
        for _ in 0..48 {
            let p: Vec<f64> = hidden.iter().map(|x| x + g.gen_range(-8i32..=8) as f64 / 16.0).collect();
            t.points += 1;
            let inside = cs.iter().all(|k| lhs_exact(k, &p) <= q(k.c));
            let inside_float = closed_cs.iter().all(|k| k.c == f64::INFINITY || lhs_exact(k, &p) <= q(k.c));
            let inside_exact = all_queries(n)
                .into_iter()
                .all(|(a, b)| exact.bound(a, b).is_none_or(|c| lhs_exact(&Constraint { a, b, c: 0.0 }, &p) <= c));
            if inside && !inside_float {
                t.fail(|| format!("case {case}: {p:?} satisfies the constraints but not the float closure"));
            }
            if inside != inside_exact {
                t.fail(|| format!("case {case}: exact closure changed the meaning at {p:?}"));
            }
        }
    }
    t
}

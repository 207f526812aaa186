//! Floating-point octagons.
//!
//! Constraints `±v_i ± v_j <= c` are stored as a difference-bound matrix over
//! the `2n` signed variables `V_2k = +v_k` and `V_2k+1 = -v_k`: entry
//! `m[i][j]` bounds `V_i - V_j`. Since `m[i][j]` and `m[j^1][i^1]` bound the
//! same constraint, only the entries with `j <= i|1` are stored. Unary
//! constraints live on the pairs `(2k, 2k+1)` (bounding `2v_k`) and
//! `(2k+1, 2k)` (bounding `-2v_k`). Bounds are doubles with `+∞` for
//! "unconstrained", and every arithmetic step is rounded upward.

use std::fmt::Write as _;

use crate::expr::VarId;
use crate::fp::dir::{add_up, mul_down, mul_up};
use crate::interval::{FloatInterval, IntervalEnv, Thresholds};
use crate::linear::LinearForm;

const INF: f64 = f64::INFINITY;

/// A signed occurrence of a variable in an octagonal constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Term {
    Pos(VarId),
    Neg(VarId),
}

impl Term {
    fn index(self) -> usize {
        match self {
            Term::Pos(v) => 2 * v.index(),
            Term::Neg(v) => 2 * v.index() + 1,
        }
    }
}

fn idx(i: usize, j: usize) -> usize {
    if j > (i | 1) {
        idx(j ^ 1, i ^ 1)
    } else {
        j + (i + 1) * (i + 1) / 2
    }
}

fn is_unary(i: usize, j: usize) -> bool {
    j == i ^ 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct Octagon {
    n: usize,
    m: Vec<f64>,
    empty: bool,
}

impl Octagon {
    /// No constraints over `n` variables.
    pub fn top(n: usize) -> Self {
        let mut m = vec![INF; 2 * n * (n + 1)];
        for i in 0..2 * n {
            m[idx(i, i)] = 0.0;
        }
        Octagon { n, m, empty: false }
    }

    pub fn bottom(n: usize) -> Self {
        Octagon { empty: true, ..Octagon::top(n) }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_bottom(&self) -> bool {
        self.empty
    }

    /// Raw matrix entry: upper bound of `V_i - V_j`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[idx(i, j)]
    }

    fn set_entry(&mut self, i: usize, j: usize, c: f64) {
        let k = idx(i, j);
        self.m[k] = c;
    }

    fn tighten_entry(&mut self, i: usize, j: usize, c: f64) {
        let k = idx(i, j);
        if c < self.m[k] {
            self.m[k] = c;
        }
    }

    /// Matrix position holding the bound of `a + b`, or of `a` alone.
    fn position(a: Term, b: Option<Term>) -> (usize, usize) {
        let i = a.index();
        match b {
            Some(b) => (i, b.index() ^ 1),
            None => (i, i ^ 1),
        }
    }

    /// Upper bound of `a + b` (or of `a` when `b` is `None`).
    pub fn bound(&self, a: Term, b: Option<Term>) -> f64 {
        let (i, j) = Octagon::position(a, b);
        let raw = self.entry(i, j);
        if b.is_none() {
            mul_up(raw, 0.5)
        } else {
            raw
        }
    }

    /// Add the constraint `a + b <= c` (or `a <= c`), keeping the tighter bound.
    pub fn add_constraint(&mut self, a: Term, b: Option<Term>, c: f64) {
        let (i, j) = Octagon::position(a, b);
        let c = if b.is_none() { mul_up(c, 2.0) } else { c };
        self.tighten_entry(i, j, c);
    }

    /// `max_o(v)`.
    pub fn max_of(&self, v: VarId) -> f64 {
        self.bound(Term::Pos(v), None)
    }

    /// `max_o(-v)`.
    pub fn max_of_neg(&self, v: VarId) -> f64 {
        self.bound(Term::Neg(v), None)
    }

    /// Shortest-path closure over the `2n` signed variables followed by one
    /// strengthening pass through the unary bounds, with every sum rounded
    /// upward. Returns bottom on a negative cycle.
    pub fn close(&self) -> Octagon {
        let mut o = self.clone();
        o.close_in_place();
        o
    }

    pub fn close_in_place(&mut self) {
        if self.empty {
            return;
        }
        let dim = 2 * self.n;
        // Shortest paths on the full matrix: relaxing only the stored half
        // would pass mirrored cells through `p ^ 1` instead of `p` and miss
        // paths. The two mirror cells stay sound, so keep the smaller.
        let mut full = vec![INF; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                full[i * dim + j] = self.entry(i, j);
            }
        }
        for p in 0..dim {
            for i in 0..dim {
                let ip = full[i * dim + p];
                if ip == INF {
                    continue;
                }
                for j in 0..dim {
                    let pj = full[p * dim + j];
                    if pj != INF {
                        let s = add_up(ip, pj);
                        if s < full[i * dim + j] {
                            full[i * dim + j] = s;
                        }
                    }
                }
            }
        }
        for i in 0..dim {
            for j in 0..=(i | 1) {
                self.set_entry(i, j, full[i * dim + j].min(full[(j ^ 1) * dim + (i ^ 1)]));
            }
        }
        for i in 0..dim {
            let ii = self.entry(i, i ^ 1);
            if ii == INF {
                continue;
            }
            for j in 0..=(i | 1) {
                let jj = self.entry(j ^ 1, j);
                if jj == INF {
                    continue;
                }
                self.tighten_entry(i, j, mul_up(add_up(ii, jj), 0.5));
            }
        }
        for i in 0..dim {
            if self.entry(i, i) < 0.0 {
                self.empty = true;
                return;
            }
            self.set_entry(i, i, 0.0);
        }
    }

    /// `u(o, l)`: an upper bound of the linear form over the octagon, using
    /// only the unary bounds of each variable.
    pub fn upper_bound(&self, l: &LinearForm) -> f64 {
        if self.empty {
            return f64::NEG_INFINITY;
        }
        let mut acc = l.const_part().hi();
        for (v, c) in l.coeffs() {
            let hi = self.max_of(v);
            let neg_lo = self.max_of_neg(v);
            let term = mul_up(hi, c.hi())
                .max(-mul_down(neg_lo, c.hi()))
                .max(mul_up(hi, c.lo()))
                .max(-mul_down(neg_lo, c.lo()));
            acc = add_up(acc, term);
            if acc == INF {
                break;
            }
        }
        acc
    }

    fn upper_bound_shifted(&self, l: &LinearForm, shifts: &[(VarId, f64)]) -> f64 {
        let mut shifted = l.clone();
        for &(v, s) in shifts {
            let unit = LinearForm::var(v).scale(&FloatInterval::double(s, s)).expect("unit scaling");
            shifted = match shifted.add(&unit) {
                Ok(f) => f,
                Err(_) => return INF,
            };
        }
        self.upper_bound(&shifted)
    }

    /// Remove every constraint mentioning `v`.
    pub fn forget(&mut self, v: VarId) {
        if self.empty {
            return;
        }
        let k = v.index();
        for i in 0..2 * self.n {
            for j in [2 * k, 2 * k + 1] {
                if i != j {
                    self.set_entry(i, j, INF);
                }
            }
        }
    }

    /// Abstract assignment `v_k ← l`. The octagon should be closed; `l`
    /// denotes values in the state before the assignment, so it may mention
    /// `v_k`. The result is not closed.
    pub fn assign(&self, vk: VarId, l: &LinearForm) -> Octagon {
        if self.empty {
            return self.clone();
        }
        let neg = l.neg();
        let mut out = self.clone();
        out.forget(vk);
        let k = vk.index();
        for i in (0..self.n).filter(|&i| i != k) {
            let vi = VarId(i);
            out.set_entry(2 * k, 2 * i + 1, self.upper_bound_shifted(l, &[(vi, 1.0)]));
            out.set_entry(2 * k, 2 * i, self.upper_bound_shifted(l, &[(vi, -1.0)]));
            out.set_entry(2 * k + 1, 2 * i + 1, self.upper_bound_shifted(&neg, &[(vi, 1.0)]));
            out.set_entry(2 * k + 1, 2 * i, self.upper_bound_shifted(&neg, &[(vi, -1.0)]));
        }
        out.set_entry(2 * k, 2 * k + 1, mul_up(self.upper_bound(l), 2.0));
        out.set_entry(2 * k + 1, 2 * k, mul_up(self.upper_bound(&neg), 2.0));
        out
    }

    /// Abstract test `l1 <= l2`, closed. Constraints are derived for the
    /// variables occurring in either form.
    pub fn test(&self, l1: &LinearForm, l2: &LinearForm) -> Octagon {
        if self.empty {
            return self.clone();
        }
        let Ok(diff) = l2.sub(l1) else {
            return self.close();
        };
        let mut out = self.clone();
        if self.upper_bound(&diff) < 0.0 {
            out.empty = true;
            return out;
        }
        let mut vars: Vec<VarId> = l1.vars().chain(l2.vars()).collect();
        vars.sort();
        vars.dedup();
        let signs = [1.0, -1.0];
        for (a, &vi) in vars.iter().enumerate() {
            for si in signs {
                let ti = if si > 0.0 { Term::Pos(vi) } else { Term::Neg(vi) };
                out.add_constraint(ti, None, self.upper_bound_shifted(&diff, &[(vi, si)]));
                for &vj in &vars[a + 1..] {
                    for sj in signs {
                        let tj = if sj > 0.0 { Term::Pos(vj) } else { Term::Neg(vj) };
                        let c = self.upper_bound_shifted(&diff, &[(vi, si), (vj, sj)]);
                        out.add_constraint(ti, Some(tj), c);
                    }
                }
            }
        }
        out.close_in_place();
        out
    }

    fn zip_with(&self, other: &Octagon, f: impl Fn(f64, f64) -> f64) -> Octagon {
        assert_eq!(self.n, other.n, "octagon dimensions differ");
        Octagon { n: self.n, m: self.m.iter().zip(&other.m).map(|(a, b)| f(*a, *b)).collect(), empty: false }
    }

    /// Pointwise maximum; precise on closed arguments.
    pub fn join(&self, other: &Octagon) -> Octagon {
        match (self.empty, other.empty) {
            (true, _) => other.clone(),
            (_, true) => self.clone(),
            _ => self.zip_with(other, f64::max),
        }
    }

    /// Pointwise minimum, not closed.
    pub fn meet(&self, other: &Octagon) -> Octagon {
        if self.empty || other.empty {
            return Octagon::bottom(self.n);
        }
        self.zip_with(other, f64::min)
    }

    /// Pointwise comparison, exact for inclusion when `self` is closed.
    pub fn leq(&self, other: &Octagon) -> bool {
        if self.empty {
            return true;
        }
        if other.empty {
            return false;
        }
        self.m.iter().zip(&other.m).all(|(a, b)| a <= b)
    }

    /// Visit every stored entry as `(i, j, position)`.
    fn positions(&self) -> impl Iterator<Item = (usize, usize, usize)> {
        let dim = 2 * self.n;
        (0..dim).flat_map(|i| (0..=(i | 1)).map(move |j| (i, j, idx(i, j))))
    }

    /// Constraint value of a stored entry (unary entries hold twice the bound).
    fn value(&self, i: usize, j: usize, raw: f64) -> f64 {
        if is_unary(i, j) {
            mul_up(raw, 0.5)
        } else {
            raw
        }
    }

    fn store(i: usize, j: usize, value: f64) -> f64 {
        if is_unary(i, j) {
            mul_up(value, 2.0)
        } else {
            value
        }
    }

    /// Widening with thresholds: a stable constraint keeps its bound, an
    /// unstable one jumps to the least threshold above its new bound, or to
    /// `+∞` past the last threshold. `self` should be the unclosed iterate.
    pub fn widen(&self, next: &Octagon, thresholds: &Thresholds) -> Octagon {
        if self.empty {
            return next.clone();
        }
        if next.empty {
            return self.clone();
        }
        let mut out = self.clone();
        for (i, j, k) in self.positions() {
            let (old, new) = (self.m[k], next.m[k]);
            if new <= old {
                continue;
            }
            let target = thresholds.at_least(self.value(i, j, new)).unwrap_or(INF);
            out.m[k] = Octagon::store(i, j, target);
        }
        out
    }

    /// Enlarge every finite bound that differs from `reference` by
    /// `eps × d`, where `d` is the largest magnitude of a finite bound.
    pub fn perturb(&self, eps: f64, reference: &Octagon) -> Octagon {
        if self.empty || eps == 0.0 {
            return self.clone();
        }
        let mut d: f64 = 0.0;
        for (i, j, k) in self.positions() {
            if i != j && self.m[k].is_finite() {
                d = d.max(self.value(i, j, self.m[k]).abs());
            }
        }
        let delta = mul_up(eps, d);
        let mut out = self.clone();
        for (i, j, k) in self.positions() {
            let unstable = reference.empty || reference.m[k] != self.m[k];
            if i != j && unstable && self.m[k].is_finite() {
                out.m[k] = Octagon::store(i, j, add_up(self.value(i, j, self.m[k]), delta));
            }
        }
        out
    }

    /// Narrowing: the meet, perturbed on the constraints that `next`
    /// improves, and never above `self`.
    pub fn narrow(&self, next: &Octagon, eps: f64) -> Octagon {
        if self.empty || next.empty {
            return Octagon::bottom(self.n);
        }
        self.meet(next).perturb(eps, self).zip_with(self, f64::min)
    }

    /// Tighten the unary bounds with interval information.
    pub fn restrict_to(&mut self, env: &IntervalEnv) {
        if self.empty {
            return;
        }
        for (v, iv) in env.iter() {
            self.add_constraint(Term::Pos(v), None, iv.hi());
            self.add_constraint(Term::Neg(v), None, -iv.lo());
        }
    }

    /// Refine `env` with the unary bounds of the octagon, rounding inward to
    /// each variable's format. `None` when the result is empty.
    pub fn reduce(&self, env: &IntervalEnv) -> Option<IntervalEnv> {
        if self.empty {
            return None;
        }
        let mut out = env.clone();
        for (v, iv) in env.iter() {
            let f = iv.format();
            let mf = f.max_finite();
            let hi = self.max_of(v);
            let lo = -self.max_of_neg(v);
            if hi < -mf || lo > mf {
                return None;
            }
            let new_hi = if hi >= mf { iv.hi() } else { iv.hi().min(f.floor_to(hi)) };
            let new_lo = if lo <= -mf { iv.lo() } else { iv.lo().max(f.ceil_to(lo)) };
            if new_lo > new_hi {
                return None;
            }
            out.set(v, FloatInterval::new(new_lo, new_hi, f));
        }
        Some(out)
    }

    /// One constraint per line, `±v ±w <= bound`, with `inf` for `+∞`. Unary
    /// constraints are printed with their own bound (not doubled).
    /// Unconstrained entries are skipped unless `all` is set.
    pub fn dump(&self, names: &[String], all: bool) -> String {
        let mut out = String::new();
        if self.empty {
            out.push_str("bottom\n");
            return out;
        }
        for (i, j, k) in self.positions() {
            if i == j || (!all && self.m[k] == INF) {
                continue;
            }
            let _ = writeln!(out, "{}", self.show(names, i, j, self.value(i, j, self.m[k])));
        }
        out
    }

    /// The binary constraints strictly tighter than what the variable
    /// ranges `env` imply, in the format of [`Octagon::dump`]. Bounds at or
    /// beyond the largest value of both formats say nothing and are skipped.
    pub fn relations(&self, names: &[String], env: &IntervalEnv) -> Vec<String> {
        if self.empty {
            return Vec::new();
        }
        // upper bound of the signed variable V_i
        let upper = |i: usize| {
            let iv = env.get(VarId(i / 2));
            if i % 2 == 0 {
                iv.hi()
            } else {
                -iv.lo()
            }
        };
        let largest = |i: usize, j: usize| {
            let f = |i: usize| env.get(VarId(i / 2)).format().max_finite();
            f(i).max(f(j))
        };
        self.positions()
            .filter(|&(i, j, k)| {
                i != j && !is_unary(i, j) && self.m[k] < add_up(upper(i), upper(j ^ 1)) && self.m[k] < largest(i, j)
            })
            .map(|(i, j, k)| self.show(names, i, j, self.m[k]))
            .collect()
    }

    fn show(&self, names: &[String], i: usize, j: usize, bound: f64) -> String {
        let signed = |i: usize, positive: bool| -> String {
            let sign = if (i % 2 == 0) == positive { '+' } else { '-' };
            format!("{sign}{}", names[i / 2])
        };
        let lhs = if is_unary(i, j) { signed(i, true) } else { format!("{} {}", signed(i, true), signed(j, false)) };
        let rhs = if bound == INF { "inf".to_string() } else { crate::interval::show_f64(bound) };
        format!("{lhs} <= {rhs}")
    }
}

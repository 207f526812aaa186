//! Floating-point intervals with outward rounding and the non-relational
//! interval analysis built on them.

use std::fmt;

use crate::expr::{CmpOp, Comparison, Expr, ExprKind, Span, VarId};
use crate::fp::{op_round, round_f64, BinOp, ExactReal, FloatFormat, Omega, RoundingMode};

/// A non-empty interval `[lo; hi]` whose bounds are members of `format`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloatInterval {
    lo: f64,
    hi: f64,
    format: FloatFormat,
}

impl FloatInterval {
    pub fn new(lo: f64, hi: f64, format: FloatFormat) -> Self {
        assert!(lo <= hi, "empty interval [{lo}; {hi}]");
        assert!(format.contains(lo) && format.contains(hi), "[{lo}; {hi}] has bounds outside {format}");
        FloatInterval { lo: lo + 0.0, hi: hi + 0.0, format }
    }

    pub fn point(x: f64, format: FloatFormat) -> Self {
        FloatInterval::new(x, x, format)
    }

    /// `[-Mf; Mf]`, the top element.
    pub fn full(format: FloatFormat) -> Self {
        FloatInterval::new(-format.max_finite(), format.max_finite(), format)
    }

    /// Interval of the doubles in `[lo; hi]` (analyzer format).
    pub fn double(lo: f64, hi: f64) -> Self {
        FloatInterval::new(lo, hi, FloatFormat::DOUBLE)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn format(&self) -> FloatFormat {
        self.format
    }

    pub fn contains_value(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    pub fn magnitude(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// The same set viewed in the analyzer format. Every supported format
    /// embeds into double, so this is exact.
    pub fn to_double(self) -> Self {
        FloatInterval { format: FloatFormat::DOUBLE, ..self }
    }

    /// `const#_f(c)`: `[R_{f,-∞}(c); R_{f,+∞}(c)]`.
    pub fn from_exact(format: FloatFormat, c: &ExactReal) -> Result<Self, Omega> {
        FloatInterval::from_exact_bounds(format, c, c)
    }

    /// Smallest interval of `format` containing the real interval `[lo; hi]`.
    pub fn from_exact_bounds(format: FloatFormat, lo: &ExactReal, hi: &ExactReal) -> Result<Self, Omega> {
        let l = crate::fp::round(format, RoundingMode::Down, lo)?;
        let h = crate::fp::round(format, RoundingMode::Up, hi)?;
        Ok(FloatInterval::new(l, h, format))
    }

    /// `cast#_f`: bounds rounded outward into `target`.
    pub fn cast(&self, target: FloatFormat) -> Result<Self, Omega> {
        let lo = round_f64(target, RoundingMode::Down, self.lo)?;
        let hi = round_f64(target, RoundingMode::Up, self.hi)?;
        Ok(FloatInterval::new(lo, hi, target))
    }

    fn check_format(&self, other: &Self) {
        assert_eq!(self.format, other.format, "interval formats differ");
    }

    fn down(&self, op: BinOp, a: f64, b: f64) -> Result<f64, Omega> {
        op_round(self.format, RoundingMode::Down, op, a, b)
    }

    fn up(&self, op: BinOp, a: f64, b: f64) -> Result<f64, Omega> {
        op_round(self.format, RoundingMode::Up, op, a, b)
    }

    pub fn add(&self, other: &Self) -> Result<Self, Omega> {
        self.check_format(other);
        let lo = self.down(BinOp::Add, self.lo, other.lo)?;
        let hi = self.up(BinOp::Add, self.hi, other.hi)?;
        Ok(FloatInterval::new(lo, hi, self.format))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Omega> {
        self.check_format(other);
        let lo = self.down(BinOp::Sub, self.lo, other.hi)?;
        let hi = self.up(BinOp::Sub, self.hi, other.lo)?;
        Ok(FloatInterval::new(lo, hi, self.format))
    }

    /// Min and max over the four directed corner results.
    fn corners(&self, op: BinOp, other: &Self) -> Result<Self, Omega> {
        let pairs = [(self.lo, other.lo), (self.lo, other.hi), (self.hi, other.lo), (self.hi, other.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in pairs {
            lo = lo.min(self.down(op, a, b)?);
            hi = hi.max(self.up(op, a, b)?);
        }
        Ok(FloatInterval::new(lo, hi, self.format))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, Omega> {
        self.check_format(other);
        self.corners(BinOp::Mul, other)
    }

    pub fn div(&self, other: &Self) -> Result<Self, Omega> {
        self.check_format(other);
        if other.lo <= 0.0 && 0.0 <= other.hi {
            return Err(if self.is_zero() { Omega::InvalidOperation } else { Omega::DivisionByZero });
        }
        self.corners(BinOp::Div, other)
    }

    pub fn neg(&self) -> Self {
        FloatInterval::new(-self.hi, -self.lo, self.format)
    }

    pub fn apply(&self, op: BinOp, other: &Self) -> Result<Self, Omega> {
        match op {
            BinOp::Add => self.add(other),
            BinOp::Sub => self.sub(other),
            BinOp::Mul => self.mul(other),
            BinOp::Div => self.div(other),
        }
    }

    pub fn join(&self, other: &Self) -> Self {
        self.check_format(other);
        FloatInterval::new(self.lo.min(other.lo), self.hi.max(other.hi), self.format)
    }

    /// Intersection, `None` when empty.
    pub fn meet(&self, other: &Self) -> Option<Self> {
        self.check_format(other);
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then(|| FloatInterval::new(lo, hi, self.format))
    }

    /// Inclusion.
    pub fn leq(&self, other: &Self) -> bool {
        self.check_format(other);
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Widening with thresholds: stable bounds are kept, unstable ones jump to
    /// the nearest threshold of the format beyond the new bound, or to `±Mf`.
    pub fn widen(&self, next: &Self, thresholds: &Thresholds) -> Self {
        self.check_format(next);
        let f = self.format;
        let hi = if next.hi <= self.hi {
            self.hi
        } else {
            thresholds.at_least_in(next.hi, f).unwrap_or(f.max_finite())
        };
        let lo = if next.lo >= self.lo {
            self.lo
        } else {
            thresholds.at_most_in(next.lo, f).unwrap_or(-f.max_finite())
        };
        FloatInterval::new(lo, hi, f)
    }

    /// Narrowing used by decreasing iterations.
    pub fn narrow(&self, next: &Self) -> Option<Self> {
        self.meet(next)
    }
}

impl fmt::Display for FloatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}; {}]", show_f64(self.lo), show_f64(self.hi))
    }
}

/// Shortest round-trip text of `x`, in exponent form when very large or
/// very small.
pub fn show_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// A sorted set of finite widening thresholds.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Thresholds {
    values: Vec<f64>,
}

impl Thresholds {
    pub fn new(values: impl IntoIterator<Item = f64>) -> Self {
        let mut values: Vec<f64> = values.into_iter().filter(|v| v.is_finite()).map(|v| v + 0.0).collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        values.dedup();
        Thresholds { values }
    }

    /// The exponential ramp `{±2^i}` over all doubles.
    pub fn ramp() -> Self {
        let powers = (-1074..=1023).map(crate::fp::pow2);
        Thresholds::new(powers.clone().chain(powers.map(|x| -x)))
    }

    pub fn with(mut self, extra: impl IntoIterator<Item = f64>) -> Self {
        self.values.extend(extra);
        Thresholds::new(self.values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Least threshold `>= x`.
    pub fn at_least(&self, x: f64) -> Option<f64> {
        let i = self.values.partition_point(|t| *t < x);
        self.values.get(i).copied()
    }

    /// Greatest threshold `<= x`.
    pub fn at_most(&self, x: f64) -> Option<f64> {
        let i = self.values.partition_point(|t| *t <= x);
        i.checked_sub(1).map(|i| self.values[i])
    }

    /// Least threshold `>= x` that is a member of `f`.
    pub fn at_least_in(&self, x: f64, f: FloatFormat) -> Option<f64> {
        let i = self.values.partition_point(|t| *t < x);
        self.values[i..].iter().copied().find(|t| f.contains(*t))
    }

    /// Greatest threshold `<= x` that is a member of `f`.
    pub fn at_most_in(&self, x: f64, f: FloatFormat) -> Option<f64> {
        let i = self.values.partition_point(|t| *t <= x);
        self.values[..i].iter().rev().copied().find(|t| f.contains(*t))
    }
}

/// One interval per program variable, indexed by [`VarId`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalEnv {
    vars: Vec<FloatInterval>,
}

impl IntervalEnv {
    pub fn new(vars: Vec<FloatInterval>) -> Self {
        IntervalEnv { vars }
    }

    pub fn get(&self, v: VarId) -> FloatInterval {
        self.vars[v.index()]
    }

    pub fn set(&mut self, v: VarId, iv: FloatInterval) {
        assert_eq!(self.vars[v.index()].format, iv.format, "format of variable {} changed", v.index());
        self.vars[v.index()] = iv;
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, FloatInterval)> + '_ {
        self.vars.iter().enumerate().map(|(i, iv)| (VarId(i), *iv))
    }

    pub fn join(&self, other: &Self) -> Self {
        IntervalEnv { vars: self.vars.iter().zip(&other.vars).map(|(a, b)| a.join(b)).collect() }
    }

    pub fn meet(&self, other: &Self) -> Option<Self> {
        let vars = self.vars.iter().zip(&other.vars).map(|(a, b)| a.meet(b)).collect::<Option<Vec<_>>>()?;
        Some(IntervalEnv { vars })
    }

    pub fn leq(&self, other: &Self) -> bool {
        self.vars.iter().zip(&other.vars).all(|(a, b)| a.leq(b))
    }

    pub fn widen(&self, next: &Self, thresholds: &Thresholds) -> Self {
        IntervalEnv { vars: self.vars.iter().zip(&next.vars).map(|(a, b)| a.widen(b, thresholds)).collect() }
    }
}

/// Interval evaluation; the error carries the span of the failing node.
pub fn eval_interval(e: &Expr, env: &IntervalEnv) -> Result<FloatInterval, (Span, Omega)> {
    let located = |r: Result<FloatInterval, Omega>| r.map_err(|k| (e.span, k));
    match &e.kind {
        ExprKind::Const(c) => {
            let lo = c.down().map_err(|k| (e.span, k))?;
            let hi = c.up().map_err(|k| (e.span, k))?;
            Ok(FloatInterval::new(lo, hi, e.format))
        }
        ExprKind::Var(v) => Ok(env.get(*v)),
        ExprKind::Cast { operand, .. } => located(eval_interval(operand, env)?.cast(e.format)),
        ExprKind::Binary { op, lhs, rhs, .. } => {
            let a = eval_interval(lhs, env)?;
            let b = eval_interval(rhs, env)?;
            located(a.apply(*op, &b))
        }
        ExprKind::Neg(operand) => Ok(eval_interval(operand, env)?.neg()),
    }
}

/// Interval evaluation that keeps going after `Ω`: every failing node is
/// recorded in `errors` and continues with the full range of its format.
pub fn eval_interval_collect(e: &Expr, env: &IntervalEnv, errors: &mut Vec<(Span, Omega)>) -> FloatInterval {
    let result = match &e.kind {
        ExprKind::Const(c) => c.down().and_then(|lo| Ok(FloatInterval::new(lo, c.up()?, e.format))),
        ExprKind::Var(v) => Ok(env.get(*v)),
        ExprKind::Cast { operand, .. } => eval_interval_collect(operand, env, errors).cast(e.format),
        ExprKind::Binary { op, lhs, rhs, .. } => {
            let a = eval_interval_collect(lhs, env, errors);
            let b = eval_interval_collect(rhs, env, errors);
            a.apply(*op, &b)
        }
        ExprKind::Neg(operand) => Ok(eval_interval_collect(operand, env, errors).neg()),
    };
    result.unwrap_or_else(|k| {
        errors.push((e.span, k));
        FloatInterval::full(e.format)
    })
}

/// Refine `env` by a comparison. Sides that are lone variables are
/// narrowed; any comparison whose side ranges cannot satisfy it yields
/// `None`.
pub fn test_refine(cond: &Comparison, env: &IntervalEnv) -> Option<IntervalEnv> {
    let (lhs, op, rhs) = match cond.op {
        CmpOp::Ge => (&cond.rhs, CmpOp::Le, &cond.lhs),
        CmpOp::Gt => (&cond.rhs, CmpOp::Lt, &cond.lhs),
        op => (&cond.lhs, op, &cond.rhs),
    };
    if let (Ok(a), Ok(b)) = (eval_interval(lhs, env), eval_interval(rhs, env)) {
        let impossible = match op {
            CmpOp::Le => a.lo > b.hi,
            CmpOp::Lt => a.lo >= b.hi,
            CmpOp::Eq => a.lo > b.hi || b.lo > a.hi,
            CmpOp::Ne => a.is_point() && a == b,
            CmpOp::Ge | CmpOp::Gt => unreachable!("normalized above"),
        };
        if impossible {
            return None;
        }
    }
    match op {
        CmpOp::Le => refine_le(lhs, rhs, false, env.clone()),
        CmpOp::Lt => refine_le(lhs, rhs, true, env.clone()),
        CmpOp::Eq => {
            let env = refine_le(lhs, rhs, false, env.clone())?;
            refine_le(rhs, lhs, false, env)
        }
        CmpOp::Ne => Some(env.clone()),
        CmpOp::Ge | CmpOp::Gt => unreachable!("normalized above"),
    }
}

/// `lhs <= rhs` (or `<` when `strict`).
fn refine_le(lhs: &Expr, rhs: &Expr, strict: bool, mut env: IntervalEnv) -> Option<IntervalEnv> {
    if let ExprKind::Var(x) = lhs.kind {
        if let Ok(bound) = eval_interval(rhs, &env) {
            let cur = env.get(x);
            let mut hi = bound.hi();
            if strict {
                hi = cur.format().pred(hi)?;
            }
            let refined = cur.meet(&FloatInterval::new(cur.lo().min(hi), hi, cur.format()))?;
            env.set(x, refined);
        }
    }
    if let ExprKind::Var(y) = rhs.kind {
        if let Ok(bound) = eval_interval(lhs, &env) {
            let cur = env.get(y);
            let mut lo = bound.lo();
            if strict {
                lo = cur.format().succ(lo)?;
            }
            let refined = cur.meet(&FloatInterval::new(lo, cur.hi().max(lo), cur.format()))?;
            env.set(y, refined);
        }
    }
    Some(env)
}

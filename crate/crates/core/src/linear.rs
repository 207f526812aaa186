//! Interval linear forms over the analyzer format (IEEE double) and the
//! linearization of floating-point expressions.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::expr::{Expr, ExprKind, VarId};
use crate::fp::{BinOp, FloatFormat, Omega};
use crate::interval::{FloatInterval, IntervalEnv};

/// Linearization could not produce a form. This is not an alarm: it only
/// means the relational domains learn nothing from the expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("linearization failed")]
pub struct LinFailure;

impl From<Omega> for LinFailure {
    fn from(_: Omega) -> Self {
        LinFailure
    }
}

type LinResult<T> = Result<T, LinFailure>;

fn zero() -> FloatInterval {
    FloatInterval::double(0.0, 0.0)
}

fn one() -> FloatInterval {
    FloatInterval::double(1.0, 1.0)
}

/// `i + Σ i_v·v`, with every interval in the analyzer format. Coefficients
/// equal to `[0; 0]` are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearForm {
    constant: FloatInterval,
    coeffs: BTreeMap<VarId, FloatInterval>,
}

impl LinearForm {
    pub fn constant(iv: FloatInterval) -> Self {
        LinearForm { constant: iv.to_double(), coeffs: BTreeMap::new() }
    }

    pub fn var(v: VarId) -> Self {
        LinearForm::constant(zero()).with_coeff(v, one())
    }

    /// Builder: set the coefficient of `v` (dropped when zero).
    pub fn with_coeff(mut self, v: VarId, coeff: FloatInterval) -> Self {
        let coeff = coeff.to_double();
        if coeff.is_zero() {
            self.coeffs.remove(&v);
        } else {
            self.coeffs.insert(v, coeff);
        }
        self
    }

    pub fn const_part(&self) -> FloatInterval {
        self.constant
    }

    pub fn coeff(&self, v: VarId) -> Option<FloatInterval> {
        self.coeffs.get(&v).copied()
    }

    /// Non-zero coefficients in ascending variable order.
    pub fn coeffs(&self) -> impl Iterator<Item = (VarId, FloatInterval)> + '_ {
        self.coeffs.iter().map(|(v, c)| (*v, *c))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn mentions(&self, v: VarId) -> bool {
        self.coeffs.contains_key(&v)
    }

    /// No variable part: the form is a plain interval.
    pub fn as_interval(&self) -> Option<FloatInterval> {
        self.coeffs.is_empty().then_some(self.constant)
    }

    fn combine(&self, other: &Self, op: fn(&FloatInterval, &FloatInterval) -> Result<FloatInterval, Omega>) -> LinResult<Self> {
        let mut out = LinearForm::constant(op(&self.constant, &other.constant)?);
        let vars: std::collections::BTreeSet<VarId> = self.vars().chain(other.vars()).collect();
        for v in vars {
            let a = self.coeff(v).unwrap_or_else(zero);
            let b = other.coeff(v).unwrap_or_else(zero);
            out = out.with_coeff(v, op(&a, &b)?);
        }
        Ok(out)
    }

    /// `⊞`.
    pub fn add(&self, other: &Self) -> LinResult<Self> {
        self.combine(other, FloatInterval::add)
    }

    /// `⊟`.
    pub fn sub(&self, other: &Self) -> LinResult<Self> {
        self.combine(other, FloatInterval::sub)
    }

    /// Exact negation.
    pub fn neg(&self) -> Self {
        LinearForm {
            constant: self.constant.neg(),
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c.neg())).collect(),
        }
    }

    fn map(&self, f: impl Fn(&FloatInterval) -> Result<FloatInterval, Omega>) -> LinResult<Self> {
        let mut out = LinearForm::constant(f(&self.constant)?);
        for (v, c) in self.coeffs() {
            out = out.with_coeff(v, f(&c)?);
        }
        Ok(out)
    }

    /// `iv ⊠ l`.
    pub fn scale(&self, iv: &FloatInterval) -> LinResult<Self> {
        let iv = iv.to_double();
        self.map(|c| iv.mul(c))
    }

    /// `l ⊘ iv`; fails when `iv` contains zero.
    pub fn divide(&self, iv: &FloatInterval) -> LinResult<Self> {
        let iv = iv.to_double();
        self.map(|c| c.div(&iv))
    }

    /// The relative error form `ε_f(l)`: each interval `[a; b]` becomes
    /// `max(|a|, |b|) ⊗ [-2^-p; 2^-p]`.
    pub fn epsilon(&self, f: FloatFormat) -> LinResult<Self> {
        let rel = f.relative_error();
        let unit = FloatInterval::double(-rel, rel);
        self.map(|c| FloatInterval::double(c.magnitude(), c.magnitude()).mul(&unit))
    }

    /// `ι(l)`: the form evaluated in interval arithmetic, summing in
    /// ascending variable order.
    pub fn intervalize(&self, env: &IntervalEnv) -> LinResult<FloatInterval> {
        let mut acc = self.constant;
        for (v, c) in self.coeffs() {
            acc = acc.add(&c.mul(&env.get(v).to_double())?)?;
        }
        Ok(acc)
    }

    /// Turn every coefficient into a scalar. The coefficient `[a; b]` of `v`
    /// becomes its rounded midpoint `c`, and the constant absorbs
    /// `[-h; h] ⊗ ρ(v)` where `h` bounds the distance from `c` to both ends.
    pub fn scalarize(&self, env: &IntervalEnv) -> LinResult<Self> {
        let mut constant = self.constant;
        let mut coeffs = BTreeMap::new();
        for (v, c) in self.coeffs() {
            let mid = c.lo() * 0.5 + c.hi() * 0.5;
            let mid = if c.contains_value(mid) { mid } else { c.lo() };
            let spread_lo = FloatInterval::double(mid, mid).sub(&FloatInterval::double(c.lo(), c.lo()))?.hi();
            let spread_hi = FloatInterval::double(c.hi(), c.hi()).sub(&FloatInterval::double(mid, mid))?.hi();
            let h = spread_lo.max(spread_hi);
            let slack = FloatInterval::double(-h, h).mul(&env.get(v).to_double())?;
            constant = constant.add(&slack)?;
            if mid != 0.0 {
                coeffs.insert(v, FloatInterval::double(mid, mid));
            }
        }
        Ok(LinearForm { constant, coeffs })
    }

    /// Real-valued range of the form at a point, as an exact interval.
    pub fn eval_exact(&self, point: &[f64]) -> (crate::fp::ExactReal, crate::fp::ExactReal) {
        use crate::fp::exact_from_f64;
        let mut lo = exact_from_f64(self.constant.lo());
        let mut hi = exact_from_f64(self.constant.hi());
        for (v, c) in self.coeffs() {
            let x = exact_from_f64(point[v.index()]);
            let a = exact_from_f64(c.lo()) * &x;
            let b = exact_from_f64(c.hi()) * &x;
            if a <= b {
                lo += a;
                hi += b;
            } else {
                lo += b;
                hi += a;
            }
        }
        (lo, hi)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for (v, c) in self.coeffs() {
            write!(f, " + {}·v{}", c, v.index())?;
        }
        Ok(())
    }
}

/// `mf_f · [-1; 1]`.
fn absolute_error(f: FloatFormat) -> LinearForm {
    let mf = f.min_positive();
    LinearForm::constant(FloatInterval::double(-mf, mf))
}

/// `⟨e⟩(ρ#, ρ#_l)`: the interval linear form of an expression, including
/// the rounding errors of every operation.
pub fn linearize(e: &Expr, env: &IntervalEnv, forms: &LinearFormEnv) -> LinResult<LinearForm> {
    let f = e.format;
    match &e.kind {
        ExprKind::Const(c) => {
            let lo = c.down()?;
            let hi = c.up()?;
            Ok(LinearForm::constant(FloatInterval::double(lo, hi)))
        }
        ExprKind::Var(v) => Ok(forms.get(*v).cloned().unwrap_or_else(|| LinearForm::var(*v))),
        ExprKind::Cast { operand, .. } => {
            let l = linearize(operand, env, forms)?;
            l.add(&l.epsilon(f)?)?.add(&absolute_error(f))
        }
        ExprKind::Neg(operand) => Ok(linearize(operand, env, forms)?.neg()),
        ExprKind::Binary { op, lhs, rhs, .. } => {
            let l1 = linearize(lhs, env, forms)?;
            let l2 = linearize(rhs, env, forms)?;
            match op {
                BinOp::Add | BinOp::Sub => {
                    let core = if *op == BinOp::Add { l1.add(&l2)? } else { l1.sub(&l2)? };
                    core.add(&l1.epsilon(f)?)?.add(&l2.epsilon(f)?)?.add(&absolute_error(f))
                }
                BinOp::Mul => {
                    let (factor, form) = match (l1.as_interval(), l2.as_interval()) {
                        (Some(i), _) => (i, l2),
                        (None, Some(i)) => (i, l1),
                        (None, None) => (l1.intervalize(env)?, l2),
                    };
                    form.scale(&factor)?.add(&form.epsilon(f)?.scale(&factor)?)?.add(&absolute_error(f))
                }
                BinOp::Div => {
                    let divisor = match l2.as_interval() {
                        Some(i) => i,
                        None => l2.intervalize(env)?,
                    };
                    l1.divide(&divisor)?.add(&l1.epsilon(f)?.divide(&divisor)?)?.add(&absolute_error(f))
                }
            }
        }
    }
}

/// The propagation environment `ρ#_l`: variables bound to the form of their
/// last assignment, as long as nothing the form mentions has changed since.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LinearFormEnv {
    bindings: BTreeMap<VarId, LinearForm>,
}

impl LinearFormEnv {
    pub fn new() -> Self {
        LinearFormEnv::default()
    }

    pub fn get(&self, v: VarId) -> Option<&LinearForm> {
        self.bindings.get(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &LinearForm)> {
        self.bindings.iter().map(|(v, l)| (*v, l))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Record `v ← l`, or only the modification of `v` when `l` is `None`.
    /// Every binding that mentions `v` is discarded, and `v` is not bound to
    /// a form mentioning itself.
    pub fn assign(&mut self, v: VarId, l: Option<LinearForm>) {
        self.bindings.remove(&v);
        self.bindings.retain(|_, form| !form.mentions(v));
        if let Some(l) = l {
            if !l.mentions(v) {
                self.bindings.insert(v, l);
            }
        }
    }

    /// Keep the bindings common to both environments.
    pub fn join(&self, other: &Self) -> Self {
        let bindings = self
            .bindings
            .iter()
            .filter(|(v, l)| other.bindings.get(v) == Some(l))
            .map(|(v, l)| (*v, l.clone()))
            .collect();
        LinearFormEnv { bindings }
    }

    /// `self ⊑ other`: every binding of `other` also holds in `self`.
    pub fn leq(&self, other: &Self) -> bool {
        other.bindings.iter().all(|(v, l)| self.bindings.get(v) == Some(l))
    }
}

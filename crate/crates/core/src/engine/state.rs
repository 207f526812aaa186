use std::fmt::Write as _;

use crate::cfg::{Action, Cfg, Guard};
use crate::expr::{CmpOp, Comparison, Expr, VarId};
use crate::interval::{eval_interval_collect, test_refine, FloatInterval, IntervalEnv, Thresholds};
use crate::linear::{linearize, LinearForm, LinearFormEnv};
use crate::octagon::Octagon;

use super::alarm::AlarmSink;
use super::Domain;

/// The abstract value at one program point. Unreachable points are
/// represented by `None` in the solver, so a state is always reachable.
#[derive(Clone, Debug, PartialEq)]
pub struct AbstractState {
    pub intervals: IntervalEnv,
    pub forms: LinearFormEnv,
    /// Closed, except for the widening accumulators of loop heads. Left at
    /// top when the octagon domain is disabled.
    pub oct: Octagon,
}

impl AbstractState {
    /// Entry state: declared ranges, no relations.
    pub fn initial(cfg: &Cfg, domain: Domain) -> Option<Self> {
        let s = AbstractState { intervals: cfg.initial_env(), forms: LinearFormEnv::new(), oct: Octagon::top(cfg.vars.len()) };
        s.normalize(domain)
    }

    /// Every variable over its whole format.
    pub fn top(cfg: &Cfg) -> Self {
        let env = IntervalEnv::new(cfg.vars.iter().map(|v| FloatInterval::full(v.format)).collect());
        AbstractState { intervals: env, forms: LinearFormEnv::new(), oct: Octagon::top(cfg.vars.len()) }
    }

    /// Exchange bounds between the octagon and the intervals, leaving the
    /// octagon closed. `None` when either becomes empty.
    pub fn normalize(mut self, domain: Domain) -> Option<Self> {
        if domain != Domain::Octagon {
            return Some(self);
        }
        // Rounding the reduced bounds inward to the format can tighten the
        // intervals past the octagon, so go round again a few times to keep
        // both sides in step.
        for _ in 0..4 {
            self.oct.restrict_to(&self.intervals);
            self.oct.close_in_place();
            if self.oct.is_bottom() {
                return None;
            }
            let reduced = self.oct.reduce(&self.intervals)?;
            if reduced == self.intervals {
                break;
            }
            self.intervals = reduced;
        }
        Some(self)
    }

    pub fn transfer(&self, action: &Action, domain: Domain, alarms: &mut AlarmSink) -> Option<Self> {
        match action {
            Action::Assign(v, e) => self.transfer_assign(*v, e, domain, alarms),
            Action::Guard(Guard::Always) | Action::Skip => Some(self.clone()),
            Action::Guard(Guard::Never) => None,
            Action::Guard(Guard::Compare(c)) => self.transfer_guard(c, domain, alarms),
            Action::Input(v, iv) => self.transfer_input(*v, *iv, domain),
        }
    }

    /// `v ← e` by the three-case algorithm: an alarm and the full range when
    /// interval evaluation fails; the interval result alone when
    /// linearization fails; otherwise the interval result refined by the
    /// linear form, which also drives the octagon and the form environment.
    pub fn transfer_assign(&self, v: VarId, e: &Expr, domain: Domain, alarms: &mut AlarmSink) -> Option<Self> {
        let mut errors = Vec::new();
        let value = eval_interval_collect(e, &self.intervals, &mut errors);
        let mut out = self.clone();
        if !errors.is_empty() {
            for (span, kind) in errors {
                alarms.raise(e, span, kind);
            }
            out.intervals.set(v, FloatInterval::full(e.format));
            out.forms.assign(v, None);
            out.oct.forget(v);
            return out.normalize(domain);
        }
        if domain == Domain::Interval {
            out.intervals.set(v, value);
            return Some(out);
        }
        match linearize(e, &self.intervals, &self.forms) {
            Err(_) => {
                out.intervals.set(v, value);
                out.forms.assign(v, None);
                if domain == Domain::Octagon {
                    out.oct = self.oct.assign(v, &LinearForm::constant(value));
                }
            }
            Ok(l) => {
                let refined = l
                    .intervalize(&self.intervals)
                    .ok()
                    .and_then(|iv| iv.cast(e.format).ok())
                    .and_then(|iv| iv.meet(&value))
                    .unwrap_or(value);
                out.intervals.set(v, refined);
                if domain == Domain::Octagon {
                    out.oct = self.oct.assign(v, &l);
                }
                out.forms.assign(v, Some(l));
            }
        }
        out.normalize(domain)
    }

    /// Filter by a comparison. Both sides are also evaluated for alarms.
    pub fn transfer_guard(&self, c: &Comparison, domain: Domain, alarms: &mut AlarmSink) -> Option<Self> {
        for side in [&c.lhs, &c.rhs] {
            let mut errors = Vec::new();
            eval_interval_collect(side, &self.intervals, &mut errors);
            for (span, kind) in errors {
                alarms.raise(side, span, kind);
            }
        }
        let mut out = self.clone();
        out.intervals = test_refine(c, &self.intervals)?;
        if domain == Domain::Octagon {
            for (a, b) in canonical(c) {
                let la = linearize(a, &out.intervals, &out.forms);
                let lb = linearize(b, &out.intervals, &out.forms);
                if let (Ok(la), Ok(lb)) = (la, lb) {
                    out.oct = out.oct.test(&la, &lb);
                    if out.oct.is_bottom() {
                        return None;
                    }
                }
            }
        }
        out.normalize(domain)
    }

    /// `v` receives any value of `range`.
    pub fn transfer_input(&self, v: VarId, range: FloatInterval, domain: Domain) -> Option<Self> {
        let mut out = self.clone();
        out.intervals.set(v, range);
        out.forms.assign(v, None);
        out.oct.forget(v);
        out.normalize(domain)
    }

    pub fn join(&self, other: &Self) -> Self {
        AbstractState {
            intervals: self.intervals.join(&other.intervals),
            forms: self.forms.join(&other.forms),
            oct: self.oct.join(&other.oct),
        }
    }

    /// Inclusion; exact when `self` is normalized.
    pub fn leq(&self, other: &Self) -> bool {
        self.intervals.leq(&other.intervals) && self.forms.leq(&other.forms) && self.oct.leq(&other.oct)
    }

    /// Widening with thresholds, the octagon part perturbed by `eps`.
    pub fn widen(&self, next: &Self, thresholds: &Thresholds, eps: f64, domain: Domain) -> Self {
        let oct = if domain == Domain::Octagon {
            self.oct.widen(&next.oct, thresholds).perturb(eps, &self.oct)
        } else {
            self.oct.clone()
        };
        AbstractState { intervals: self.intervals.widen(&next.intervals, thresholds), forms: self.forms.join(&next.forms), oct }
    }

    /// One decreasing step `self ⊓ next`. `None` if the meet is empty.
    pub fn narrow(&self, next: &Self, eps: f64, domain: Domain) -> Option<Self> {
        let oct = if domain == Domain::Octagon { self.oct.narrow(&next.oct, eps) } else { self.oct.clone() };
        if oct.is_bottom() {
            return None;
        }
        Some(AbstractState { intervals: self.intervals.meet(&next.intervals)?, forms: self.forms.join(&next.forms), oct })
    }

    /// Variable ranges, then the octagon constraints when `relational`.
    pub fn dump(&self, names: &[String], relational: bool) -> String {
        let mut out = String::new();
        for (v, iv) in self.intervals.iter() {
            let _ = writeln!(out, "{} in {}", names[v.index()], iv);
        }
        if relational {
            out.push_str(&self.oct.dump(names, false));
        }
        out
    }
}

/// The comparison as a list of `a <= b` tests. `<` is weakened to `<=`,
/// `==` gives both directions, and `!=` gives nothing.
fn canonical(c: &Comparison) -> Vec<(&Expr, &Expr)> {
    match c.op {
        CmpOp::Le | CmpOp::Lt => vec![(&c.lhs, &c.rhs)],
        CmpOp::Ge | CmpOp::Gt => vec![(&c.rhs, &c.lhs)],
        CmpOp::Eq => vec![(&c.lhs, &c.rhs), (&c.rhs, &c.lhs)],
        CmpOp::Ne => Vec::new(),
    }
}

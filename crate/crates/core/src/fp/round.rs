//! The rounding functions and the correctly rounded basic operators.
//!
//! [`round`] works on exact rationals and is the reference. [`op_round`] and
//! [`round_f64`] take a shortcut through hardware double arithmetic plus an
//! exact error term when the format allows it, and fall back to [`round`]
//! otherwise.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::exact::{exact_from_f64, exact_ilog2, pow2_exact, ExactReal};
use super::{pow2, scale, FloatFormat, RoundingMode};

/// The run-time error token, tagged with its cause for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Omega {
    Overflow,
    DivisionByZero,
    InvalidOperation,
}

impl fmt::Display for Omega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Omega::Overflow => "overflow",
            Omega::DivisionByZero => "division-by-zero",
            Omega::InvalidOperation => "invalid-operation",
        })
    }
}

/// A concrete result: a member of the format, or `Ω`.
pub type Outcome = Result<f64, Omega>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub const ALL: [BinOp; 4] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div];

    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    /// Exact real result, `None` for a zero divisor.
    pub fn apply_exact(self, a: &ExactReal, b: &ExactReal) -> Option<ExactReal> {
        Some(match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => {
                if b.is_zero() {
                    return None;
                }
                a / b
            }
        })
    }
}

fn division_by_zero(dividend_is_zero: bool) -> Omega {
    if dividend_is_zero {
        Omega::InvalidOperation
    } else {
        Omega::DivisionByZero
    }
}

/// Largest finite value as an exact rational.
fn max_finite_exact(f: FloatFormat) -> ExactReal {
    exact_from_f64(f.max_finite())
}

/// The round-to-nearest overflow cutoff `(2 - 2^(-p-1)) * 2^emax`.
fn nearest_cutoff_exact(f: FloatFormat) -> ExactReal {
    let p = f.frac_bits() as i64;
    let significand = (BigInt::from(1) << (p + 2)) - 1;
    ExactReal::from_integer(significand) * pow2_exact(f.max_exp() as i64 - p - 1)
}

/// Rounding on magnitudes: the mode mapped so that `Up` means away from zero.
fn magnitude_mode(r: RoundingMode, negative: bool) -> RoundingMode {
    if negative {
        r.mirrored()
    } else {
        r
    }
}

fn apply_sign(x: f64, negative: bool) -> f64 {
    if negative {
        -x + 0.0
    } else {
        x + 0.0
    }
}

/// `R_{f,r}(x)`, computed exactly.
pub fn round(f: FloatFormat, r: RoundingMode, x: &ExactReal) -> Outcome {
    if x.is_zero() {
        return Ok(0.0);
    }
    let negative = x.is_negative();
    let a = x.abs();
    let mode = magnitude_mode(r, negative);
    if a > max_finite_exact(f) {
        return match mode {
            RoundingMode::Up => Err(Omega::Overflow),
            RoundingMode::Down | RoundingMode::TowardZero => Ok(apply_sign(f.max_finite(), negative)),
            RoundingMode::NearestEven => {
                if a >= nearest_cutoff_exact(f) {
                    Err(Omega::Overflow)
                } else {
                    Ok(apply_sign(f.max_finite(), negative))
                }
            }
        };
    }
    let p = f.frac_bits() as i64;
    let qe = exact_ilog2(&a).max(f.min_exp() as i64) - p;
    // a = (m + frac) * 2^qe with 0 <= frac < 1 and m < 2^(p+1).
    let scaled = &a * pow2_exact(-qe);
    let m = scaled.numer().div_floor(scaled.denom());
    let frac = scaled - ExactReal::from_integer(m.clone());
    let m = m.to_u64().expect("significand fits in 64 bits");
    let qe = qe as i32;
    let lo = scale(m as f64, qe);
    if frac.is_zero() {
        return Ok(apply_sign(lo, negative));
    }
    let hi = scale((m + 1) as f64, qe);
    let rounded = match mode {
        RoundingMode::Up => hi,
        RoundingMode::Down | RoundingMode::TowardZero => lo,
        RoundingMode::NearestEven => {
            let twice: BigInt = frac.numer() * 2;
            match twice.cmp(frac.denom()) {
                Ordering::Less => lo,
                Ordering::Greater => hi,
                Ordering::Equal => {
                    if m % 2 == 0 {
                        lo
                    } else {
                        hi
                    }
                }
            }
        }
    };
    Ok(apply_sign(rounded, negative))
}

/// Round a value known through its nearest double `q` and the sign `sgn` of
/// the exact residual `x - q`. Requires `f.has_fast_path()`.
fn round_near(f: FloatFormat, r: RoundingMode, q: f64, sgn: Ordering) -> Outcome {
    debug_assert!(f.has_fast_path());
    let negative = q < 0.0 || (q == 0.0 && sgn == Ordering::Less);
    let a = q.abs();
    let s = if negative { sgn.reverse() } else { sgn };
    let mode = magnitude_mode(r, negative);
    let mf = f.max_finite();

    if a > mf || (a == mf && s == Ordering::Greater) {
        return match mode {
            RoundingMode::Up => Err(Omega::Overflow),
            RoundingMode::Down | RoundingMode::TowardZero => Ok(apply_sign(mf, negative)),
            RoundingMode::NearestEven => {
                // Hardware overflow already means the value is past the
                // double cutoff, which is at least the format's one.
                if a.is_infinite() {
                    return Err(Omega::Overflow);
                }
                let p = f.frac_bits() as i32;
                let cutoff = scale(((1u64 << (p + 2)) - 1) as f64, f.max_exp() - p - 1);
                if a > cutoff || (a == cutoff && s != Ordering::Less) {
                    Err(Omega::Overflow)
                } else {
                    Ok(apply_sign(mf, negative))
                }
            }
        };
    }

    if a == 0.0 {
        // Only reachable with a residual below the smallest double.
        return match (mode, s) {
            (RoundingMode::Up, Ordering::Greater) => Ok(apply_sign(f.min_positive(), negative)),
            _ => Ok(0.0),
        };
    }

    if f.contains(a) {
        let rounded = match (mode, s) {
            (_, Ordering::Equal) | (RoundingMode::NearestEven, _) => a,
            (RoundingMode::Up, Ordering::Greater) => f.succ(a).expect("below Mf"),
            (RoundingMode::Up, Ordering::Less) => a,
            (_, Ordering::Greater) => a,
            (_, Ordering::Less) => f.pred(a).expect("positive"),
        };
        return Ok(apply_sign(rounded, negative));
    }

    let lo = f.floor_to(a);
    let hi = f.succ(lo).expect("below Mf");
    let rounded = match mode {
        RoundingMode::Up => hi,
        RoundingMode::Down | RoundingMode::TowardZero => lo,
        RoundingMode::NearestEven => {
            let mid = lo + (hi - lo) / 2.0;
            match a.partial_cmp(&mid).expect("finite").then(s) {
                Ordering::Less => lo,
                Ordering::Greater => hi,
                Ordering::Equal => {
                    let qe = f.quantum_exp(hi);
                    let m_hi = scale(hi, -qe) as u64;
                    if m_hi % 2 == 0 {
                        hi
                    } else {
                        lo
                    }
                }
            }
        }
    };
    Ok(apply_sign(rounded, negative))
}

fn sign_of(x: f64) -> Ordering {
    x.partial_cmp(&0.0).expect("not NaN")
}

fn round_exact_op(f: FloatFormat, r: RoundingMode, op: BinOp, a: f64, b: f64) -> Outcome {
    let exact = op
        .apply_exact(&exact_from_f64(a), &exact_from_f64(b))
        .ok_or(division_by_zero(a == 0.0))?;
    round(f, r, &exact)
}

/// Correctly rounded `a op b` in format `f`, where `a` and `b` are members.
pub fn op_round(f: FloatFormat, r: RoundingMode, op: BinOp, a: f64, b: f64) -> Outcome {
    debug_assert!(f.contains(a) && f.contains(b), "operands {a}, {b} not in {f}");
    if op == BinOp::Div && b == 0.0 {
        return Err(division_by_zero(a == 0.0));
    }
    if !f.has_fast_path() {
        return round_exact_op(f, r, op, a, b);
    }
    match op {
        BinOp::Add | BinOp::Sub => {
            let b = if op == BinOp::Sub { -b } else { b };
            let s = a + b;
            if s.is_infinite() {
                return round_near(f, r, s, Ordering::Equal);
            }
            // TwoSum: s + err == a + b exactly.
            let bb = s - a;
            let err = (a - (s - bb)) + (b - bb);
            round_near(f, r, s, sign_of(err))
        }
        BinOp::Mul => {
            if a == 0.0 || b == 0.0 {
                return Ok(0.0);
            }
            let prod = a * b;
            if prod.is_infinite() {
                return round_near(f, r, prod, Ordering::Equal);
            }
            if prod.abs() < pow2(-968) {
                return round_exact_op(f, r, op, a, b);
            }
            let err = a.mul_add(b, -prod);
            round_near(f, r, prod, sign_of(err))
        }
        BinOp::Div => {
            if a == 0.0 {
                return Ok(0.0);
            }
            let quot = a / b;
            let safe = |x: f64| (pow2(-900)..=pow2(900)).contains(&x.abs());
            if !(safe(a) && safe(b) && safe(quot)) {
                return round_exact_op(f, r, op, a, b);
            }
            // a - quot * b is exact; its sign relative to b gives a/b - quot.
            let residual = (-quot).mul_add(b, a);
            let sgn = if b > 0.0 { sign_of(residual) } else { sign_of(residual).reverse() };
            round_near(f, r, quot, sgn)
        }
    }
}

/// `R_{f,r}(x)` for a finite double `x` (casts between formats).
pub fn round_f64(f: FloatFormat, r: RoundingMode, x: f64) -> Outcome {
    debug_assert!(x.is_finite());
    if f.has_fast_path() {
        round_near(f, r, x, Ordering::Equal)
    } else {
        round(f, r, &exact_from_f64(x))
    }
}

//! Directed double arithmetic over the extended reals.
//!
//! These are the `⊕_{fa,+∞}`-style operators of the analyzer format (IEEE
//! double). Overflow maps to the infinity on the rounding side, `∞ - ∞`
//! resolves to the sound side and `0 × ∞` is `0`.

use num_traits::Signed;

use super::exact::exact_from_f64;
use super::{pow2, BinOp};

/// Sign of `a op b - r` from exact rationals, for the cases where the
/// error-free transformations below could underflow.
fn exact_residual_sign(op: BinOp, a: f64, b: f64, r: f64) -> f64 {
    let (a, b, r) = (exact_from_f64(a), exact_from_f64(b), exact_from_f64(r));
    let d = match op {
        BinOp::Add => a + b - r,
        BinOp::Sub => a - b - r,
        BinOp::Mul => a * b - r,
        BinOp::Div => a / b - r,
    };
    if d.is_positive() {
        1.0
    } else if d.is_negative() {
        -1.0
    } else {
        0.0
    }
}

/// Exact sign of the rounding error of `a op b` when the hardware result
/// `r` is finite.
fn residual_sign(op: BinOp, a: f64, b: f64, r: f64) -> f64 {
    match op {
        BinOp::Add => {
            let bb = r - a;
            (a - (r - bb)) + (b - bb)
        }
        BinOp::Sub => {
            let b = -b;
            let bb = r - a;
            (a - (r - bb)) + (b - bb)
        }
        BinOp::Mul if r.abs() >= pow2(-968) => a.mul_add(b, -r),
        BinOp::Div => {
            let safe = |x: f64| (pow2(-900)..=pow2(900)).contains(&x.abs());
            if !(safe(a) && safe(b) && safe(r)) {
                return exact_residual_sign(op, a, b, r);
            }
            let residual = (-r).mul_add(b, a);
            if b > 0.0 {
                residual
            } else {
                -residual
            }
        }
        BinOp::Mul => exact_residual_sign(op, a, b, r),
    }
}

fn directed(op: BinOp, a: f64, b: f64, up: bool) -> f64 {
    debug_assert!(!a.is_nan() && !b.is_nan());
    let worst = if up { f64::INFINITY } else { f64::NEG_INFINITY };
    let finite_operands = a.is_finite() && b.is_finite();
    if op == BinOp::Mul && (a == 0.0 || b == 0.0) {
        return 0.0;
    }
    if op == BinOp::Div && a == 0.0 && b != 0.0 {
        return 0.0;
    }
    if op == BinOp::Div && a.is_infinite() && b.is_infinite() {
        return worst;
    }
    let r = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
    };
    if r.is_nan() {
        return worst;
    }
    if !finite_operands {
        return r + 0.0;
    }
    if r.is_infinite() {
        // Overflow of finite operands: the exact value lies beyond ±MAX.
        return match (up, r > 0.0) {
            (true, true) | (false, false) => r,
            (true, false) => -f64::MAX,
            (false, true) => f64::MAX,
        };
    }
    let r = r + 0.0;
    let err = residual_sign(op, a, b, r);
    if up && err > 0.0 {
        r.next_up()
    } else if !up && err < 0.0 {
        r.next_down()
    } else {
        r
    }
}

pub fn add_up(a: f64, b: f64) -> f64 {
    directed(BinOp::Add, a, b, true)
}

pub fn add_down(a: f64, b: f64) -> f64 {
    directed(BinOp::Add, a, b, false)
}

pub fn sub_up(a: f64, b: f64) -> f64 {
    directed(BinOp::Sub, a, b, true)
}

pub fn sub_down(a: f64, b: f64) -> f64 {
    directed(BinOp::Sub, a, b, false)
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    directed(BinOp::Mul, a, b, true)
}

pub fn mul_down(a: f64, b: f64) -> f64 {
    directed(BinOp::Mul, a, b, false)
}

/// Upward division; the divisor must be non-zero.
pub fn div_up(a: f64, b: f64) -> f64 {
    assert!(b != 0.0, "directed division by zero");
    directed(BinOp::Div, a, b, true)
}

/// Downward division; the divisor must be non-zero.
pub fn div_down(a: f64, b: f64) -> f64 {
    assert!(b != 0.0, "directed division by zero");
    directed(BinOp::Div, a, b, false)
}

//! Exact rationals and literal parsing.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// An arbitrary-precision rational. Every member of every supported format is
/// a dyadic rational, so comparisons with float values are exact.
pub type ExactReal = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiteralError {
    #[error("empty numeric literal")]
    Empty,
    #[error("malformed numeric literal `{0}`")]
    Malformed(String),
    #[error("exponent out of range in `{0}`")]
    ExponentRange(String),
}

/// Exact value of a finite double.
pub fn exact_from_f64(x: f64) -> ExactReal {
    BigRational::from_float(x).expect("finite double")
}

/// The double equal to `x`, if `x` is exactly representable.
pub fn exact_to_f64(x: &ExactReal) -> Option<f64> {
    let approx = x.to_f64()?;
    if approx.is_finite() && exact_from_f64(approx) == *x {
        Some(approx + 0.0)
    } else {
        None
    }
}

pub(crate) fn pow2_exact(e: i64) -> ExactReal {
    let magnitude = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(magnitude)
    } else {
        BigRational::new(BigInt::one(), magnitude)
    }
}

fn pow10_exact(e: i64) -> ExactReal {
    let magnitude = num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(magnitude)
    } else {
        BigRational::new(BigInt::one(), magnitude)
    }
}

// Literals far beyond any format are still parsed exactly, but an absurd
// exponent would only burn memory.
const MAX_EXPONENT: i64 = 100_000;

/// Parse a decimal (`12`, `0.1`, `1e-3`, `.5`) or hexadecimal float
/// (`0x1.8p3`) literal, with an optional leading sign, into an exact value.
pub fn parse_exact(text: &str) -> Result<ExactReal, LiteralError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(LiteralError::Empty);
    }
    let (negative, body) = match text.as_bytes()[0] {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let malformed = || LiteralError::Malformed(text.to_string());
    let value = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        parse_radix(hex, 16, &['p', 'P'], text)?
    } else {
        parse_radix(body, 10, &['e', 'E'], text)?
    };
    if body.is_empty() {
        return Err(malformed());
    }
    Ok(if negative { -value } else { value })
}

fn parse_radix(body: &str, radix: u32, exp_marks: &[char], whole: &str) -> Result<ExactReal, LiteralError> {
    let malformed = || LiteralError::Malformed(whole.to_string());
    let (mantissa, exponent) = match body.find(exp_marks) {
        Some(pos) => (&body[..pos], Some(&body[pos + 1..])),
        None => (&body[..], None),
    };
    // Hex floats need a binary exponent to be unambiguous.
    if radix == 16 && exponent.is_none() {
        return Err(malformed());
    }
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    let digits: String = int_part.chars().chain(frac_part.chars()).collect();
    if !digits.chars().all(|c| c.is_digit(radix)) {
        return Err(malformed());
    }
    let significand = BigInt::parse_bytes(digits.as_bytes(), radix).ok_or_else(malformed)?;
    let exp_value = match exponent {
        Some(e) => {
            let digits = e.strip_prefix(['+', '-']).unwrap_or(e);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            e.parse::<i64>()
                .ok()
                .filter(|v| v.abs() <= MAX_EXPONENT)
                .ok_or_else(|| LiteralError::ExponentRange(whole.to_string()))?
        }
        None => 0,
    };
    let frac_len = frac_part.len() as i64;
    let value = BigRational::from_integer(significand);
    Ok(if radix == 16 {
        value * pow2_exact(exp_value - 4 * frac_len)
    } else {
        value * pow10_exact(exp_value - frac_len)
    })
}

/// `floor(log2(|x|))` for non-zero `x`.
pub(crate) fn exact_ilog2(x: &ExactReal) -> i64 {
    debug_assert!(!x.is_zero());
    let a = x.abs();
    let mut k = a.numer().bits() as i64 - a.denom().bits() as i64;
    loop {
        if a < pow2_exact(k) {
            k -= 1;
        } else if a >= pow2_exact(k + 1) {
            k += 1;
        } else {
            return k;
        }
    }
}

//! Binary floating-point formats and rounding modes.

use std::fmt;

use thiserror::Error;

use super::pow2;

/// The four IEEE 754 rounding directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum RoundingMode {
    /// Round to nearest, ties to even.
    #[default]
    NearestEven,
    /// Round toward zero (truncation).
    TowardZero,
    /// Round toward +∞.
    Up,
    /// Round toward −∞.
    Down,
}

impl RoundingMode {
    pub const ALL: [RoundingMode; 4] = [
        RoundingMode::NearestEven,
        RoundingMode::TowardZero,
        RoundingMode::Up,
        RoundingMode::Down,
    ];

    /// Short name used by the input language (`@rm(n)` etc).
    pub fn short_name(self) -> &'static str {
        match self {
            RoundingMode::NearestEven => "n",
            RoundingMode::TowardZero => "z",
            RoundingMode::Up => "up",
            RoundingMode::Down => "down",
        }
    }

    pub fn from_short_name(name: &str) -> Option<Self> {
        match name {
            "n" => Some(RoundingMode::NearestEven),
            "z" => Some(RoundingMode::TowardZero),
            "up" => Some(RoundingMode::Up),
            "down" => Some(RoundingMode::Down),
            _ => None,
        }
    }

    /// The mode obtained by mirroring the real line (x ↦ −x).
    pub(crate) fn mirrored(self) -> Self {
        match self {
            RoundingMode::Up => RoundingMode::Down,
            RoundingMode::Down => RoundingMode::Up,
            other => other,
        }
    }
}

impl fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("format needs at least 2 exponent bits and 1 fraction bit (got e={exp_bits}, p={frac_bits})")]
    TooSmall { exp_bits: u32, frac_bits: u32 },
    #[error("format e={exp_bits}, p={frac_bits}, bias={bias} is not embeddable in IEEE double")]
    NotEmbeddable { exp_bits: u32, frac_bits: u32, bias: i32 },
}

/// A binary interchange-style format: `exp_bits` biased exponent bits,
/// `frac_bits` explicit fraction bits and an exponent `bias`.
///
/// Only formats whose finite values all embed exactly into IEEE double are
/// accepted, so that a member of the format can always be held in an `f64`.
/// Infinities and NaNs are not members; `+0` and `-0` are the same member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FloatFormat {
    exp_bits: u32,
    frac_bits: u32,
    bias: i32,
}

impl FloatFormat {
    /// IEEE 754 binary32.
    pub const SINGLE: FloatFormat = FloatFormat { exp_bits: 8, frac_bits: 23, bias: 127 };
    /// IEEE 754 binary64.
    pub const DOUBLE: FloatFormat = FloatFormat { exp_bits: 11, frac_bits: 52, bias: 1023 };
    /// A toy 8-bit format (e=4, p=3, bias=7) small enough to enumerate.
    pub const MINI: FloatFormat = FloatFormat { exp_bits: 4, frac_bits: 3, bias: 7 };

    pub fn new(exp_bits: u32, frac_bits: u32, bias: i32) -> Result<Self, FormatError> {
        if exp_bits < 2 || frac_bits < 1 {
            return Err(FormatError::TooSmall { exp_bits, frac_bits });
        }
        let candidate = FloatFormat { exp_bits, frac_bits, bias };
        let embeddable = exp_bits <= 11
            && frac_bits <= 52
            && candidate.min_exp() - frac_bits as i32 >= -1074
            && candidate.max_exp() <= 1023;
        if !embeddable {
            return Err(FormatError::NotEmbeddable { exp_bits, frac_bits, bias });
        }
        Ok(candidate)
    }

    pub fn exp_bits(&self) -> u32 {
        self.exp_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn bias(&self) -> i32 {
        self.bias
    }

    /// Exponent of the smallest normal binade, `1 - bias`.
    pub fn min_exp(&self) -> i32 {
        1 - self.bias
    }

    /// Exponent of the largest finite binade, `2^e - 2 - bias`.
    pub fn max_exp(&self) -> i32 {
        (1i32 << self.exp_bits) - 2 - self.bias
    }

    /// Smallest positive member, `2^(1 - bias - p)`.
    pub fn min_positive(&self) -> f64 {
        pow2(self.min_exp() - self.frac_bits as i32)
    }

    /// Largest finite member, `(2 - 2^-p) * 2^(2^e - bias - 2)`.
    pub fn max_finite(&self) -> f64 {
        // (2^(p+1) - 1) * 2^(emax - p), both factors exact in double.
        let significand = ((1u64 << (self.frac_bits + 1)) - 1) as f64;
        significand * pow2(self.max_exp() - self.frac_bits as i32)
    }

    /// Relative rounding error bound `2^-p` used by the error forms.
    pub fn relative_error(&self) -> f64 {
        pow2(-(self.frac_bits as i32))
    }

    /// Exponent of the spacing between consecutive members around `x`
    /// (`x` non-zero and finite).
    pub(crate) fn quantum_exp(&self, x: f64) -> i32 {
        ilogb(x).max(self.min_exp()) - self.frac_bits as i32
    }

    /// Whether the hardware double result plus a residual sign determines the
    /// correctly rounded result without exact arithmetic.
    pub(crate) fn has_fast_path(&self) -> bool {
        *self == FloatFormat::DOUBLE
            || (self.frac_bits <= 51 && self.min_exp() - self.frac_bits as i32 >= -1073)
    }

    /// Short name used in the input language when one exists.
    pub fn name(&self) -> Option<&'static str> {
        match *self {
            FloatFormat::SINGLE => Some("f32"),
            FloatFormat::DOUBLE => Some("f64"),
            FloatFormat::MINI => Some("mini"),
            _ => None,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "f32" => Some(FloatFormat::SINGLE),
            "f64" => Some(FloatFormat::DOUBLE),
            "mini" => Some(FloatFormat::MINI),
            _ => None,
        }
    }
}

impl fmt::Display for FloatFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name() {
            Some(name) => f.write_str(name),
            None => write!(f, "float(e={}, p={}, bias={})", self.exp_bits, self.frac_bits, self.bias),
        }
    }
}

/// `floor(log2(|x|))` for finite non-zero `x`, subnormals included.
pub(crate) fn ilogb(x: f64) -> i32 {
    debug_assert!(x.is_finite() && x != 0.0);
    let bits = x.abs().to_bits();
    let biased = (bits >> 52) as i32;
    if biased == 0 {
        let mantissa = bits & ((1u64 << 52) - 1);
        -1011 - mantissa.leading_zeros() as i32
    } else {
        biased - 1023
    }
}

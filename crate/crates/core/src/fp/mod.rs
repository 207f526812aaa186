//! Floating-point model: formats, exact rounding and the concrete semantics
//! of the basic operators.

pub mod dir;
mod exact;
mod format;
mod round;

pub use exact::{exact_from_f64, exact_to_f64, parse_exact, ExactReal, LiteralError};
pub use format::{FloatFormat, FormatError, RoundingMode};
pub use round::{op_round, round, round_f64, BinOp, Omega, Outcome};

pub(crate) use format::ilogb;

/// `2^e` as a double, for `-1074 <= e <= 1023`.
pub fn pow2(e: i32) -> f64 {
    assert!((-1074..=1023).contains(&e), "2^{e} is not a finite double");
    if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (e + 1074))
    }
}

/// `x * 2^e`, exact whenever the result is representable.
pub(crate) fn scale(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= pow2(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= pow2(-1000);
        e += 1000;
    }
    x * pow2(e)
}

impl FloatFormat {
    /// Whether `x` is a member of the format (finite, in range, on the grid).
    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() || x.abs() > self.max_finite() {
            return false;
        }
        if x == 0.0 {
            return true;
        }
        let m = scale(x.abs(), -self.quantum_exp(x));
        m.fract() == 0.0
    }

    /// Smallest member strictly greater than `x`, `None` above `Mf`.
    pub fn succ(&self, x: f64) -> Option<f64> {
        debug_assert!(self.contains(x), "{x} is not a member of {self}");
        if x == 0.0 {
            Some(self.min_positive())
        } else if x < 0.0 {
            self.pred(-x).map(|y| -y)
        } else if x >= self.max_finite() {
            None
        } else {
            Some(x + pow2(self.quantum_exp(x)))
        }
    }

    /// Largest member strictly smaller than `x`, `None` below `-Mf`.
    pub fn pred(&self, x: f64) -> Option<f64> {
        debug_assert!(self.contains(x), "{x} is not a member of {self}");
        if x <= 0.0 {
            return self.succ(-x).map(|y| if y == 0.0 { 0.0 } else { -y });
        }
        let k = ilogb(x);
        let step = if k > self.min_exp() && x == pow2(k) {
            pow2(k - 1 - self.frac_bits() as i32)
        } else {
            pow2(self.quantum_exp(x))
        };
        Some(x - step + 0.0)
    }

    /// Largest member `<= x`, for any finite double `x` with `|x| <= Mf`.
    pub fn floor_to(&self, x: f64) -> f64 {
        debug_assert!(x.is_finite() && x.abs() <= self.max_finite());
        if x == 0.0 {
            return 0.0;
        }
        let qe = self.quantum_exp(x);
        let m = scale(x, -qe).floor();
        scale(m, qe) + 0.0
    }

    /// Smallest member `>= x`, for any finite double `x` with `|x| <= Mf`.
    pub fn ceil_to(&self, x: f64) -> f64 {
        -self.floor_to(-x) + 0.0
    }

    /// All members in increasing order, with a single zero. Meant for tiny
    /// formats such as [`FloatFormat::MINI`].
    pub fn enumerate(&self) -> Vec<f64> {
        let p = self.frac_bits() as i32;
        let mut positive = Vec::new();
        // Subnormals then one binade per exponent.
        for m in 1..(1u64 << p) {
            positive.push(scale(m as f64, self.min_exp() - p));
        }
        for e in self.min_exp()..=self.max_exp() {
            for m in (1u64 << p)..(1u64 << (p + 1)) {
                positive.push(scale(m as f64, e - p));
            }
        }
        let mut all: Vec<f64> = positive.iter().rev().map(|x| -x).collect();
        all.push(0.0);
        all.extend(positive);
        all
    }
}

/// `successor` as a total function into outcomes: `Ω` above `Mf`.
pub fn successor(f: FloatFormat, x: f64) -> Outcome {
    f.succ(x).ok_or(Omega::Overflow)
}

/// `predecessor` as a total function into outcomes: `Ω` below `-Mf`.
pub fn predecessor(f: FloatFormat, x: f64) -> Outcome {
    f.pred(x).ok_or(Omega::Overflow)
}

//! Independent oracles shared by the integration suites.
//!
//! Nothing here calls the crate's rounding code: the mini format is built
//! from its bit patterns, rounding is done by search over that list with
//! exact rationals, and real-valued checks use `BigRational` directly.

#![allow(dead_code)]

pub mod concrete;
pub mod suites;

use std::collections::HashMap;
use std::sync::OnceLock;

use fpoct::fp::{BinOp, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

pub fn q_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Every member of the mini format (4 exponent bits, 3 fraction bits, bias
/// 7), sorted, with one zero.
pub struct Mini {
    pub values: Vec<f64>,
    pub exact: Vec<BigRational>,
    /// Last fraction bit of each value's encoding.
    odd: Vec<bool>,
    index: HashMap<u64, usize>,
}

pub const MINI_MAX: f64 = 240.0;
/// Round-to-nearest overflows from here on: (2 - 2^-4) * 2^7.
pub const MINI_CUTOFF: f64 = 248.0;

impl Mini {
    fn build() -> Mini {
        let mut entries: Vec<(f64, bool)> = Vec::new();
        for e in 0..15u32 {
            for f in 0..8u32 {
                let m = f as f64 / 8.0;
                let v = if e == 0 { m * 2f64.powi(1 - 7) } else { (1.0 + m) * 2f64.powi(e as i32 - 7) };
                entries.push((v, f & 1 == 1));
                if v != 0.0 {
                    entries.push((-v, f & 1 == 1));
                }
            }
        }
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let values: Vec<f64> = entries.iter().map(|e| e.0).collect();
        let odd = entries.iter().map(|e| e.1).collect();
        let exact = values.iter().map(|&v| q(v)).collect();
        let index = values.iter().enumerate().map(|(i, v)| ((v + 0.0).to_bits(), i)).collect();
        Mini { values, exact, odd, index }
    }

    pub fn get() -> &'static Mini {
        static MINI: OnceLock<Mini> = OnceLock::new();
        MINI.get_or_init(Mini::build)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Whether the encoding of the value at `i` ends in a 1 bit.
    pub fn is_odd(&self, i: usize) -> bool {
        self.odd[i]
    }

    pub fn index_of(&self, x: f64) -> usize {
        self.index[&(x + 0.0).to_bits()]
    }

    /// Index of the negation of the value at `i`.
    pub fn neg(&self, i: usize) -> usize {
        self.len() - 1 - i
    }

    /// Largest member `<= x` and smallest member `>= x`, as indices.
    fn bracket(&self, x: &BigRational) -> (Option<usize>, Option<usize>) {
        let above = self.exact.partition_point(|v| v < x);
        if above < self.len() && &self.exact[above] == x {
            return (Some(above), Some(above));
        }
        (above.checked_sub(1), (above < self.len()).then_some(above))
    }

    /// The reference rounding, as an index; `None` is `Ω`.
    pub fn round(&self, r: RoundingMode, x: &BigRational) -> Option<usize> {
        let max = q(MINI_MAX);
        let top = self.len() - 1;
        match r {
            RoundingMode::Up => {
                if x > &max {
                    return None;
                }
                if x < &-max.clone() {
                    return Some(0);
                }
                self.bracket(x).1
            }
            RoundingMode::Down => {
                if x < &-max.clone() {
                    return None;
                }
                if x > &max {
                    return Some(top);
                }
                self.bracket(x).0
            }
            RoundingMode::TowardZero => {
                if x > &max {
                    return Some(top);
                }
                if x < &-max.clone() {
                    return Some(0);
                }
                let (lo, hi) = self.bracket(x);
                if x.is_negative() {
                    hi
                } else {
                    lo
                }
            }
            RoundingMode::NearestEven => {
                if x.abs() >= q(MINI_CUTOFF) {
                    return None;
                }
                if x > &max {
                    return Some(top);
                }
                if x < &-max.clone() {
                    return Some(0);
                }
                match self.bracket(x) {
                    (Some(a), Some(b)) if a == b => Some(a),
                    (Some(a), Some(b)) => {
                        let da = x - &self.exact[a];
                        let db = &self.exact[b] - x;
                        if da < db || (da == db && !self.odd[a]) {
                            Some(a)
                        } else {
                            Some(b)
                        }
                    }
                    _ => unreachable!("inside the format range"),
                }
            }
        }
    }

    pub fn round_value(&self, r: RoundingMode, x: &BigRational) -> Option<f64> {
        self.round(r, x).map(|i| self.values[i])
    }

    /// `a op b` rounded with `r`, on indices; `None` for `Ω`.
    pub fn op(&self, op: BinOp, r: RoundingMode, a: usize, b: usize) -> Option<usize> {
        let (x, y) = (&self.exact[a], &self.exact[b]);
        let exact = match op {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            BinOp::Mul => x * y,
            BinOp::Div => {
                if y.is_zero() {
                    return None;
                }
                x / y
            }
        };
        self.round(r, &exact)
    }
}

/// `Mini::op` for all operand pairs, tabulated.
pub struct OpTables {
    n: usize,
    /// `[op][mode][a * n + b]`, `-1` for `Ω`.
    cells: Vec<Vec<Vec<i16>>>,
}

pub fn op_index(op: BinOp) -> usize {
    BinOp::ALL.iter().position(|&o| o == op).unwrap()
}

pub fn mode_index(r: RoundingMode) -> usize {
    RoundingMode::ALL.iter().position(|&m| m == r).unwrap()
}

impl OpTables {
    pub fn get() -> &'static OpTables {
        static TABLES: OnceLock<OpTables> = OnceLock::new();
        TABLES.get_or_init(|| {
            let m = Mini::get();
            let n = m.len();
            let cells = BinOp::ALL
                .iter()
                .map(|&op| {
                    RoundingMode::ALL
                        .iter()
                        .map(|&r| {
                            let mut t = vec![0i16; n * n];
                            for a in 0..n {
                                for b in 0..n {
                                    t[a * n + b] = m.op(op, r, a, b).map_or(-1, |i| i as i16);
                                }
                            }
                            t
                        })
                        .collect()
                })
                .collect();
            OpTables { n, cells }
        })
    }

    pub fn at(&self, op: BinOp, r: RoundingMode, a: usize, b: usize) -> Option<usize> {
        let c = self.cells[op_index(op)][mode_index(r)][a * self.n + b];
        (c >= 0).then_some(c as usize)
    }
}

/// Whether `value ∈ c + Σ [a_v; b_v] · x_v` over the reals, for the
/// interval constant `c` and `terms = [((a_v, b_v), x_v)]`.
pub fn affine_contains(constant: (f64, f64), terms: &[((f64, f64), f64)], value: f64) -> bool {
    // A double-precision estimate settles almost every case; the margin
    // covers its rounding errors many times over.
    let mut lo = constant.0;
    let mut hi = constant.1;
    let mut scale = constant.0.abs().max(constant.1.abs());
    for &((a, b), x) in terms {
        let (p, r) = (a * x, b * x);
        lo += p.min(r);
        hi += p.max(r);
        scale += p.abs().max(r.abs());
    }
    let margin = scale * 1e-12 + 1e-300;
    if lo.is_finite() && hi.is_finite() && scale.is_finite() {
        if value > lo + margin && value < hi - margin {
            return true;
        }
        if value < lo - margin || value > hi + margin {
            return false;
        }
    }
    let mut lo = q(constant.0);
    let mut hi = q(constant.1);
    for &((a, b), x) in terms {
        let x = q(x);
        let (p, r) = (q(a) * &x, q(b) * &x);
        if p <= r {
            lo += p;
            hi += r;
        } else {
            lo += r;
            hi += p;
        }
    }
    let v = q(value);
    lo <= v && v <= hi
}

/// A small deterministic generator for suites that do not need proptest's
/// shrinking.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

//! The devil staircase transplanted onto the edge from `q_5` to `q_2`.
//!
//! Along the diagonal from `q_4` through `q_5` to `q_2`, parametrised by
//! `u ∈ [−1, 1]`, the function is `C(max(u, 0))` with `C` the Cantor
//! function; every branch hanging off the diagonal carries the value of its
//! attachment point. The function is continuous, has `E_1^m = 1` at every
//! level, and its increments live on a set of `ν`-measure `(2/3)^m`.

use crate::function::sampler::CrossSampler;
use crate::geometry::address::Digit;
use crate::scalar::Scalar;

/// Exact Cantor value `C(k / 3^d)` as `(numerator, log2 denominator)`.
pub fn cantor_dyadic(k: i64, d: u32) -> (i64, u32) {
    let full = 3i64.pow(d);
    if k <= 0 {
        return (0, 0);
    }
    if k >= full {
        return (1, 0);
    }
    let mut num = 0i64;
    let mut rest = k;
    let mut place = full;
    for i in 1..=d {
        place /= 3;
        let digit = rest / place;
        rest %= place;
        match digit {
            1 => return (2 * num + 1, i),
            2 => num = 2 * num + 1,
            _ => num *= 2,
        }
    }
    (num, d)
}

/// The Cantor function as an exact scalar.
pub fn cantor_value<T: Scalar>(k: i64, d: u32) -> T {
    let (num, bits) = cantor_dyadic(k, d);
    T::from_ratio(num, 1i64 << bits)
}

/// The staircase on the edge `[q_5, q_2]`, extended by constants.
#[derive(Clone, Copy, Debug, Default)]
pub struct CantorEdgeFunction;

#[derive(Clone, Debug)]
pub enum CantorState<T> {
    /// The cell lies off the diagonal (or on a flat piece of it).
    Constant(T),
    /// The cell's diagonal covers `u ∈ [k, k + 2]·3^{-depth}`.
    Diagonal { k: i64, depth: u32 },
}

impl CantorEdgeFunction {
    /// Value at offset `k·3^{-d}` along the edge from `q_5` to `q_2`.
    pub fn value_at_offset<T: Scalar>(&self, k: i64, d: u32) -> T {
        cantor_value(k, d)
    }

    /// Floating-point value at offset `t ∈ [0, 1]`. Triadic inputs (up to
    /// rounding) are evaluated exactly, since digit extraction amplifies the
    /// representation error by 3 per digit.
    pub fn value_f64(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        for d in 0..=30u32 {
            let scaled = t * 3f64.powi(d as i32);
            let k = scaled.round();
            if (scaled - k).abs() <= 4.0 * f64::EPSILON * scaled.max(1.0) {
                let (num, bits) = cantor_dyadic(k as i64, d);
                return num as f64 / (1u64 << bits) as f64;
            }
        }
        let (mut x, mut acc, mut w) = (t, 0.0, 0.5);
        for _ in 0..34 {
            x *= 3.0;
            let digit = x.floor();
            x -= digit;
            if digit == 1.0 {
                return acc + w;
            }
            if digit >= 2.0 {
                acc += w;
            }
            w *= 0.5;
        }
        acc
    }
}

impl<T: Scalar> CrossSampler<T> for CantorEdgeFunction {
    type State = CantorState<T>;

    fn root(&self) -> CantorState<T> {
        CantorState::Diagonal { k: -1, depth: 0 }
    }

    fn child(&self, s: &CantorState<T>, d: Digit) -> CantorState<T> {
        match s {
            CantorState::Constant(v) => CantorState::Constant(v.clone()),
            &CantorState::Diagonal { k, depth } => {
                let next = match d.get() {
                    4 => 3 * k,
                    5 => 3 * k + 2,
                    2 => 3 * k + 4,
                    _ => return CantorState::Constant(cantor_value(k + 1, depth)),
                };
                let (lo, hi): (T, T) = (cantor_value(next, depth + 1), cantor_value(next + 2, depth + 1));
                if lo == hi {
                    CantorState::Constant(lo)
                } else {
                    CantorState::Diagonal { k: next, depth: depth + 1 }
                }
            }
        }
    }

    fn vertex_values(&self, s: &CantorState<T>) -> [T; 5] {
        match s {
            CantorState::Constant(v) => std::array::from_fn(|_| v.clone()),
            &CantorState::Diagonal { k, depth } => {
                let mid: T = cantor_value(k + 1, depth);
                let mut v: [T; 5] = std::array::from_fn(|_| mid.clone());
                v[Digit::Q4.slot()] = cantor_value(k, depth);
                v[Digit::Q2.slot()] = cantor_value(k + 2, depth);
                v
            }
        }
    }

    fn is_constant(&self, s: &CantorState<T>) -> bool {
        matches!(s, CantorState::Constant(_))
    }
}

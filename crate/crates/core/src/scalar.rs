//! Scalar abstraction shared by every numeric routine.
//!
//! Vertex values, energies and integrals are generic over [`Scalar`], which
//! covers `f32`, `f64` and the exact [`Rational`] type. Routines that need
//! transcendental functions (logarithms, non-integer powers, roots) require
//! [`Real`], which only the floating-point types implement.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Rational = BigRational;

/// An integrability / energy exponent `p ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::Domain(format!("exponent must be a finite number ≥ 1, got {p}")));
        }
        Ok(Self(p))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// The exponent as an integer, when it is one.
    pub fn as_integer(self) -> Option<u32> {
        (self.0.fract() == 0.0 && self.0 <= u32::MAX as f64).then_some(self.0 as u32)
    }

    pub fn is_even_integer(self) -> bool {
        self.as_integer().is_some_and(|k| k % 2 == 0)
    }
}

impl Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Numeric type usable for vertex values and energies.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Send + Sync + 'static + Num + FromPrimitive + ToPrimitive
{
    /// Whether arithmetic in this type is exact.
    const EXACT: bool;

    /// Relative tolerance used when asserting identities that hold exactly in
    /// real arithmetic.
    fn identity_tolerance() -> f64;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn magnitude(&self) -> Self;

    /// Whether `|x|^p` is representable for this exponent.
    fn supports(p: Exponent) -> bool;

    /// `|x|^p`. Callers must check [`Scalar::supports`] first.
    fn abs_pow(&self, p: Exponent) -> Self;

    /// `3^{(p-1)m}`, the energy renormalisation factor at level `m`.
    fn energy_scale(p: Exponent, m: u32) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn check_exponent(p: Exponent) -> Result<()> {
        if Self::supports(p) {
            Ok(())
        } else {
            Err(Error::UnsupportedExponent(p.get()))
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

/// Floating-point scalar with transcendental functions.
pub trait Real: Scalar + num_traits::Float + Copy {}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn identity_tolerance() -> f64 {
                $tol
            }

            fn from_ratio(num: i64, den: i64) -> Self {
                (num as f64 / den as f64) as $t
            }

            fn magnitude(&self) -> Self {
                self.abs()
            }

            fn supports(_: Exponent) -> bool {
                true
            }

            fn abs_pow(&self, p: Exponent) -> Self {
                match p.as_integer() {
                    Some(1) => self.abs(),
                    Some(k) if k <= 64 => self.abs().powi(k as i32),
                    _ => self.abs().powf(p.get() as $t),
                }
            }

            fn energy_scale(p: Exponent, m: u32) -> Self {
                match p.as_integer() {
                    Some(k) if (k as u64 - 1) * m as u64 <= 60 => {
                        // exact while 3^e fits the mantissa-sized integer range
                        let e = (k - 1) * m;
                        if e <= 33 {
                            3u64.pow(e) as $t
                        } else {
                            (3.0 as $t).powi(e as i32)
                        }
                    }
                    _ => (3.0 as $t).powf(((p.get() - 1.0) * m as f64) as $t),
                }
            }
        }

        impl Real for $t {}
    };
}

float_scalar!(f64, 1e-12);
float_scalar!(f32, 1e-5);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn identity_tolerance() -> f64 {
        0.0
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn magnitude(&self) -> Self {
        if self < &BigRational::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn supports(p: Exponent) -> bool {
        p.as_integer().is_some()
    }

    fn abs_pow(&self, p: Exponent) -> Self {
        let k = p.as_integer().expect("rational |x|^p requires an integer exponent");
        num_traits::pow(self.magnitude(), k as usize)
    }

    fn energy_scale(p: Exponent, m: u32) -> Self {
        let k = p.as_integer().expect("rational energy scale requires an integer exponent");
        BigRational::from_integer(num_traits::pow(BigInt::from(3), ((k - 1) * m) as usize))
    }
}

/// `3^k` as an exact scalar.
pub fn pow3<T: Scalar>(k: u32) -> T {
    num_traits::pow(T::from_u64(3).expect("3 is representable"), k as usize)
}

/// `5^k` as an exact scalar.
pub fn pow5<T: Scalar>(k: u32) -> T {
    num_traits::pow(T::from_u64(5).expect("5 is representable"), k as usize)
}

/// Relative comparison with the scalar's identity tolerance.
pub fn approx_eq<T: Scalar>(a: &T, b: &T) -> bool {
    if T::EXACT {
        return a == b;
    }
    let (x, y) = (a.to_f64_lossy(), b.to_f64_lossy());
    x == y || (x - y).abs() <= T::identity_tolerance() * x.abs().max(y.abs())
}

const PAIRWISE_BLOCK: usize = 32;

/// Sum in a fixed binary-tree order; the result does not depend on how the
/// caller later splits the work.
pub fn pairwise_sum<T: Scalar>(xs: &[T]) -> T {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().fold(T::zero(), |acc, x| acc + x.clone());
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Fixed-shape parallel reduction: `n` items are cut into chunks of `chunk`
/// items, each chunk is folded by `f`, and the chunk results are combined by
/// [`pairwise_sum`]. Output is bit-identical for any thread count.
pub fn chunked_sum<T, F>(n: usize, chunk: usize, f: F) -> T
where
    T: Scalar,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let chunk = chunk.max(1);
    let parts: Vec<T> = (0..n.div_ceil(chunk))
        .into_par_iter()
        .map(|c| f(c * chunk..((c + 1) * chunk).min(n)))
        .collect();
    pairwise_sum(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_validation() {
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::INFINITY).is_err());
        assert_eq!(Exponent::new(3.0).unwrap().as_integer(), Some(3));
        assert_eq!(Exponent::new(1.5).unwrap().as_integer(), None);
    }

    #[test]
    fn energy_scale_matches_direct_power() {
        let p = Exponent::new(2.0).unwrap();
        assert_eq!(f64::energy_scale(p, 4), 81.0);
        assert_eq!(
            BigRational::energy_scale(Exponent::new(3.0).unwrap(), 2),
            BigRational::from_integer(BigInt::from(81))
        );
        let q = Exponent::new(1.5).unwrap();
        assert!((f64::energy_scale(q, 2) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rational_abs_pow_is_exact() {
        let x = BigRational::from_ratio(-2, 3);
        assert_eq!(x.abs_pow(Exponent::new(3.0).unwrap()), BigRational::from_ratio(8, 27));
        assert!(!BigRational::supports(Exponent::new(1.5).unwrap()));
    }

    #[test]
    fn pairwise_sum_is_order_stable() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let a = pairwise_sum(&xs);
        let b = chunked_sum(xs.len(), 64, |r| pairwise_sum(&xs[r]));
        let c = chunked_sum(xs.len(), 64, |r| pairwise_sum(&xs[r]));
        assert_eq!(b.to_bits(), c.to_bits());
        assert!((a - b).abs() < 1e-12);
    }
}

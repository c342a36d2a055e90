//! Fractal constants and the measures `μ` (cells) and `ν` (skeleton length).

use crate::scalar::{pow3, pow5, Exponent, Scalar};

/// Hausdorff dimension `log 5 / log 3`.
pub const D_H: f64 = 1.464_973_520_717_927;

/// Geodesic diameter of `K`.
pub const DIAMETER: f64 = 2.0;

pub fn d_h() -> f64 {
    5f64.ln() / 3f64.ln()
}

/// Critical Besov exponent `α_p = 1 − 1/p + d_h/p`.
pub fn alpha_p(p: Exponent) -> f64 {
    1.0 - 1.0 / p.get() + D_H / p.get()
}

/// Per-level weights of the two measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureContext {
    pub level: u32,
}

impl MeasureContext {
    pub fn new(level: u32) -> Self {
        Self { level }
    }

    /// `μ(K_w) = 5^{-n}` for `|w| = n`.
    pub fn cell_weight<T: Scalar>(&self) -> T {
        T::one() / pow5::<T>(self.level)
    }

    /// `ν(e) = 3^{-n}` for a level-`n` edge.
    pub fn edge_weight<T: Scalar>(&self) -> T {
        T::one() / pow3::<T>(self.level)
    }

    /// Total skeleton length `4·(5/3)^n` of `V̄_n`.
    pub fn skeleton_length<T: Scalar>(&self) -> T {
        T::from_u64(4).expect("small integer") * pow5::<T>(self.level) / pow3::<T>(self.level)
    }
}

//! Numerics on the Vicsek fractal: exact cable-system geometry, piecewise
//! affine functions and weak gradients, discrete `p`-energies,
//! Korevaar–Schoen and Besov quantities, and theorem-level experiments
//! (Morrey and Poincaré inequalities, maximal functions, `K`-functionals).
//!
//! Numeric routines are generic over [`Scalar`]; the aliases below fix the
//! common choices.

pub mod besov;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod function;
pub mod geometry;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Exponent, Rational, Real, Scalar};

/// Piecewise-affine functions in floating point.
pub type PaFunction64 = function::pa::PaFunction<f64>;
/// Piecewise-affine functions in single precision.
pub type PaFunction32 = function::pa::PaFunction<f32>;
/// Piecewise-affine functions with exact rational values.
pub type PaFunctionQ = function::pa::PaFunction<Rational>;
pub type EdgeDensity64 = function::density::EdgeDensity<f64>;
pub type EdgeDensityQ = function::density::EdgeDensity<Rational>;
pub type CellFunction64 = function::cell::CellFunction<f64>;
pub type CellFunctionQ = function::cell::CellFunction<Rational>;

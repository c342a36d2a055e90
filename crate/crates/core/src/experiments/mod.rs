//! Theorem-level experiments: Morrey and Poincaré inequalities with their
//! sharp constants, maximal functions and Hajłasz norms, the averaging
//! interpolant `Φ_n` and `K`-functional scans.

mod interpolation;
mod maximal;
mod morrey;
mod poincare;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::log_log_fit;

pub use interpolation::{
    hat, k_functional_scan, partition_of_unity, phi_n, phi_n_cells, star_cells, KFuncPoint, KFuncReport,
};
pub use maximal::{
    default_maximal_grid, hajlasz_divergence, maximal_function, maximal_values, HajlaszLevel,
    MaximalReport, LAMBDA_POINTS,
};
pub use morrey::{morrey_check, morrey_ratio, random_pairs, MorreyReport};
pub use poincare::{central_radius, poincare_check, sharpness_fit, PoincareReport};

/// A power law `value ≈ constant·scale^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub exponent: f64,
    pub constant: f64,
    /// Largest deviation of `ln value` from the fitted line.
    pub residual: f64,
    pub points: Vec<(f64, f64)>,
}

/// Least-squares fit on log-log axes; needs at least four positive points.
pub fn power_fit(points: Vec<(f64, f64)>) -> Result<FitResult> {
    let usable = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).count();
    if usable < 4 {
        return Err(Error::Domain(format!("power fits need at least 4 positive points, got {usable}")));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    let fit = log_log_fit(&xs, &ys).ok_or_else(|| Error::Domain("degenerate scales".into()))?;
    Ok(FitResult { exponent: fit.slope, constant: fit.intercept.exp(), residual: fit.residual, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_fit_recovers_exponent() {
        let pts: Vec<(f64, f64)> = (1..=5).map(|k| {
            let r = 3f64.powi(-k);
            (r, 0.5 * r.powf(2.7))
        }).collect();
        let f = power_fit(pts).unwrap();
        assert!((f.exponent - 2.7).abs() < 1e-12 && (f.constant - 0.5).abs() < 1e-12);
        assert!(power_fit(vec![(1.0, 1.0), (0.5, 0.2), (0.1, 0.01)]).is_err());
    }
}

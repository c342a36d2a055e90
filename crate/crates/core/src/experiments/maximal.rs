//! The maximal function
//! `g_f(x) = sup_r μ(B(x,r))^{-1/p}·(∫_{B(x,r)} |∂f|^p dν)^{1/p}`, its
//! strong and weak `L^p(μ)` norms, and Lusin–Hölder constants.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{ball_edge_mass, distances_from, level_graph};
use crate::error::Result;
use crate::function::pa::PaFunction;
use crate::geometry::ball::BallProfile;
use crate::geometry::lattice::LatticePoint;
use crate::geometry::measure::alpha_p;
use crate::geometry::metric::{self, Radius};
use crate::scalar::{pairwise_sum, Exponent, Scalar};

/// Number of geometric `λ` values in the weak-norm scan.
pub const LAMBDA_POINTS: usize = 32;

/// `r = 3^{-j}` and `2·3^{-j}` for `j = 0..=m`.
pub fn default_maximal_grid(m: u32) -> Vec<Radius> {
    let mut grid: Vec<Radius> = (0..=m)
        .flat_map(|j| [Ratio::new(2, 3i64.pow(j)), Ratio::new(1, 3i64.pow(j))])
        .collect();
    grid.sort();
    grid
}

/// `g_f` at each point, as a supremum over the radius grid.
pub fn maximal_values(f: &PaFunction<f64>, points: &[LatticePoint], p: Exponent, grid: &[Radius]) -> Result<Vec<f64>> {
    let g = f.graph();
    let powers: Vec<f64> = f.weak_gradient().values().iter().map(|x| x.abs_pow(p)).collect();
    let inv = 1.0 / p.get();
    points
        .par_iter()
        .map(|x| {
            let dist = distances_from(g, x)?;
            let scale = g.level().max(x.scale());
            let profile = BallProfile::new(x)?;
            let mut best = 0.0f64;
            for r in grid {
                let mass = ball_edge_mass(g, &powers, &dist, scale, r);
                if mass > 0.0 {
                    let mu = profile.measure_f64(*r.numer() as f64 / *r.denom() as f64);
                    best = best.max((mass / mu).powf(inv));
                }
            }
            Ok(best)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaximalReport {
    pub p: f64,
    pub level: u32,
    pub grid: Vec<f64>,
    /// `g_f` at the attachment vertex of every level-`m` cell.
    pub values: Vec<f64>,
    /// `‖g_f‖_{L^p(μ_m)}^p = Σ_w 5^{-m} g_f(a_w)^p`.
    pub strong: f64,
    /// `sup_λ λ^p μ_m{g_f > λ}` over the `λ` grid.
    pub weak: f64,
    pub lambdas: Vec<f64>,
    /// Smallest `C` with `|f(x) − f(y)| ≤ C d(x,y)^{α_p}(g(x) + g(y))` on
    /// the sampled pairs.
    pub lusin_holder_c: Option<f64>,
}

impl MaximalReport {
    /// Chebyshev: the weak quasinorm never exceeds the strong norm.
    pub fn chebyshev_ok(&self) -> bool {
        self.weak <= self.strong * (1.0 + 1e-12)
    }
}

/// Geometric grid of [`LAMBDA_POINTS`] values spanning the positive range.
fn lambda_grid(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    if !(lo.is_finite() && hi > 0.0) {
        return Vec::new();
    }
    if lo == hi {
        return vec![lo; 1];
    }
    let step = (hi / lo).ln() / (LAMBDA_POINTS - 1) as f64;
    (0..LAMBDA_POINTS).map(|i| lo * (step * i as f64).exp()).collect()
}

/// Maximal function at all level-`m` anchors, with norms and optionally
/// `lusin_pairs` random Lusin–Hölder pairs.
pub fn maximal_function(
    f: &PaFunction<f64>,
    m: u32,
    p: Exponent,
    grid: &[Radius],
    lusin_pairs: usize,
    seed: u64,
) -> Result<MaximalReport> {
    let g = level_graph(m)?;
    let anchors: Vec<LatticePoint> = g.anchors().into_iter().map(|a| g.point(a)).collect();
    let values = maximal_values(f, &anchors, p, grid)?;
    let pe = p.get();
    let cell = 5f64.powi(-(m as i32));
    let powers: Vec<f64> = values.iter().map(|v| v.powf(pe)).collect();
    let strong = pairwise_sum(&powers) * cell;
    let lambdas = lambda_grid(&values);
    let weak = lambdas
        .iter()
        .map(|&l| l.powf(pe) * values.iter().filter(|&&v| v > l).count() as f64 * cell)
        .fold(0.0, f64::max);

    let lusin_holder_c = if lusin_pairs == 0 {
        None
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = alpha_p(p);
        let mut best = 0.0f64;
        for _ in 0..lusin_pairs {
            let (i, j) = (rng.gen_range(0..anchors.len()), rng.gen_range(0..anchors.len()));
            if anchors[i] == anchors[j] {
                continue;
            }
            let diff = (f.evaluate_point(&anchors[i])? - f.evaluate_point(&anchors[j])?).abs();
            if diff == 0.0 {
                continue;
            }
            let d = metric::distance(&anchors[i], &anchors[j])?.to_f64();
            best = best.max(diff / (d.powf(alpha) * (values[i] + values[j])));
        }
        Some(best)
    };
    Ok(MaximalReport {
        p: pe,
        level: m,
        grid: grid.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect(),
        values,
        strong,
        weak,
        lambdas,
        lusin_holder_c,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HajlaszLevel {
    pub level: u32,
    pub strong: f64,
    pub weak: f64,
}

/// Strong and weak norms of `g_f` at each resolution, each with the
/// default grid down to `3^{-m}`.
pub fn hajlasz_divergence(
    f: &PaFunction<f64>,
    p: Exponent,
    levels: impl IntoIterator<Item = u32>,
) -> Result<Vec<HajlaszLevel>> {
    levels
        .into_iter()
        .map(|m| {
            let r = maximal_function(f, m, p, &default_maximal_grid(m), 0, 0)?;
            Ok(HajlaszLevel { level: m, strong: r.strong, weak: r.weak })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::power_fit;
    use crate::geometry::address::{Address, Digit};
    use crate::geometry::measure::D_H;

    fn ex(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn constant_gives_zeros() {
        let f = PaFunction::constant(1.0f64, 0).unwrap();
        let r = maximal_function(&f, 2, ex(2.0), &default_maximal_grid(2), 10, 1).unwrap();
        assert!(r.values.iter().all(|v| *v == 0.0));
        assert_eq!((r.strong, r.weak), (0.0, 0.0));
    }

    #[test]
    fn whole_ball_value() {
        // at r = 2 the ball is K: (∫|∂f|^2 dν / 1)^{1/2} = 2 for the cross
        let f = PaFunction::<f64>::cross();
        let v = maximal_values(&f, &[LatticePoint::center()], ex(2.0), &[Ratio::from_integer(2)]).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_holds() {
        let f = PaFunction::<f64>::cross();
        for m in 1..=3 {
            let r = maximal_function(&f, m, ex(2.0), &default_maximal_grid(m), 100, 7).unwrap();
            assert!(r.chebyshev_ok());
            assert_eq!(r.lambdas.len(), LAMBDA_POINTS);
            assert!(r.lusin_holder_c.unwrap() > 0.0);
        }
    }

    #[test]
    fn growth_near_the_skeleton() {
        // corner q1 of the cell 2 5…5 hangs 3^-k off the arm from q5 to q2
        let f = PaFunction::<f64>::cross();
        let grid = default_maximal_grid(9);
        let mut pts = Vec::new();
        for k in 2..=6u32 {
            let mut digits = vec![2u8];
            digits.extend(std::iter::repeat_n(5, k as usize - 1));
            let x = Address::from_digits(&digits).unwrap().vertex(Digit::Q1);
            let g = maximal_values(&f, &[x], ex(2.0), &grid).unwrap()[0];
            pts.push((3f64.powi(-(k as i32)), g));
        }
        let fit = power_fit(pts).unwrap();
        assert!((fit.exponent - (1.0 - D_H) / 2.0).abs() < 0.15, "{fit:?}");
    }
}

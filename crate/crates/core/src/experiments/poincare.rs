//! Poincaré inequalities on balls and the sharpness of the exponent
//! `pα_p` on central balls.

use std::collections::VecDeque;

use num_rational::Ratio;
use serde::Serialize;

use crate::energy::{energy_limit, level_graph, Region};
use crate::error::Result;
use crate::experiments::{power_fit, FitResult};
use crate::function::integral::{cross_integral, mu_integral_on_cell};
use crate::function::pa::PaFunction;
use crate::function::sampler::CrossSampler;
use crate::geometry::address::{Address, Digit};
use crate::geometry::ball::ball_cells;
use crate::geometry::graph::CableGraph;
use crate::geometry::lattice::LatticePoint;
use crate::geometry::measure::alpha_p;
use crate::geometry::metric::Radius;
use crate::scalar::Exponent;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareReport {
    pub p: f64,
    pub center: String,
    pub radius: String,
    /// Level of the cell quadrature.
    pub level: u32,
    pub mu: f64,
    pub mean: f64,
    /// `∫_B |f − ⨍_B f|^p dμ` and its error bound.
    pub integral: f64,
    pub integral_err: f64,
    /// `E_{B,p}(f)`.
    pub energy: f64,
    /// Diameter of the ball's vertex set at the quadrature level.
    pub diameter: f64,
    /// `∫_B |f − ⨍_B f|^p dμ / (r^{pα_p}·E_{B,p}(f))`.
    pub ratio: f64,
    pub ratio_err: f64,
    /// `⨍_B |f − ⨍_B f|^p dμ` against `diam(B)^{p−1}·E_{B,p}(f)`.
    pub mean_form_lhs: f64,
    pub mean_form_rhs: f64,
    pub mean_form_ratio: f64,
    pub mean_form_ratio_err: f64,
}

fn cell_cross(f: &PaFunction<f64>, w: &Address) -> [f64; 5] {
    f.vertex_values(&f.state_at(w))
}

fn safe_div(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Geodesic diameter of the subtree spanned by the flagged vertices.
fn subtree_diameter(g: &CableGraph, inside: &[bool]) -> u64 {
    let farthest = |start: usize| {
        let mut dist = vec![u64::MAX; g.vertex_count()];
        dist[start] = 0;
        let mut q = VecDeque::from([start]);
        let mut best = (0, start);
        while let Some(u) = q.pop_front() {
            if dist[u] > best.0 {
                best = (dist[u], u);
            }
            for (v, _) in g.neighbors(u) {
                if inside[v] && dist[v] == u64::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        best
    };
    match inside.iter().position(|&b| b) {
        Some(s) => farthest(farthest(s).1).0,
        None => 0,
    }
}

/// Both forms of the Poincaré inequality on the closed ball `B(center, r)`.
///
/// The ball is resolved into cells `extra` levels below its resolution.
/// Fully covered cells are integrated exactly by the self-similar
/// recursion; the partially covered remainder, whose mass is known exactly,
/// is bracketed by the function's range there. Central triadic balls have
/// no remainder, so their values are exact.
pub fn poincare_check(
    f: &PaFunction<f64>,
    center: &LatticePoint,
    radius: &Radius,
    p: Exponent,
    extra: u32,
) -> Result<PoincareReport> {
    let region = Region::ball(*center, *radius)?;
    let level = region.resolution()?.max(f.level()) + extra;
    let energy = energy_limit(f, p, &region)?;
    let approx = ball_cells(center, radius, level)?;
    let cell = 5f64.powi(-(level as i32));
    let inner: Vec<[f64; 5]> = approx.inner.iter().map(|w| cell_cross(f, w)).collect();
    let boundary: Vec<[f64; 5]> = approx.boundary.iter().map(|w| cell_cross(f, w)).collect();
    let mu = approx.mu;
    // the exact ball measure carries rounding; a relative remainder below
    // 1e-12 means the inner cells tile the ball
    let rest = mu - inner.len() as f64 * cell;
    let rest = if boundary.is_empty() || rest <= 1e-12 * mu { 0.0 } else { rest };

    let range = |cells: &[[f64; 5]]| {
        cells.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    };
    let cell_mean = |v: &[f64; 5]| v[4] + v[..4].iter().map(|x| x - v[4]).sum::<f64>() / 7.0;
    let inner_sum: f64 = inner.iter().map(cell_mean).sum();
    let (blo, bhi) = range(&boundary);
    let (mean, mean_err) = if rest == 0.0 {
        (inner_sum / inner.len() as f64, 0.0)
    } else {
        let avg = boundary.iter().map(|v| v[4]).sum::<f64>() / boundary.len() as f64;
        ((inner_sum * cell + rest * avg) / mu, rest * (bhi - blo) / mu)
    };

    let pe = p.get();
    let integral_inner: f64 =
        inner.iter().map(|v| cross_integral(&v.map(|x| x - mean), p)).sum::<f64>() * cell;
    let (lo, hi) = range(&[inner.as_slice(), boundary.as_slice()].concat());
    let maxdev = (hi - mean).abs().max((lo - mean).abs());
    let (rest_int, rest_err) = if rest == 0.0 {
        (0.0, 0.0)
    } else {
        let avg = boundary.iter().map(|v| (v[4] - mean).abs().powf(pe)).sum::<f64>() / boundary.len() as f64;
        (rest * avg, rest * maxdev.powf(pe))
    };
    let integral = integral_inner + rest_int;
    // moving the centring constant by δ changes the integral by at most p·μ·(dev + δ)^{p−1}·δ
    let integral_err = rest_err + pe * mu * (maxdev + mean_err).powf(pe - 1.0) * mean_err;

    let g = level_graph(level)?;
    let inside = region.members(&g)?;
    let diameter = subtree_diameter(&g, &inside) as f64 * 3f64.powi(-(level as i32));

    let r = *radius.numer() as f64 / *radius.denom() as f64;
    let scale = r.powf(pe * alpha_p(p)) * energy;
    let mean_form_rhs = diameter.powf(pe - 1.0) * energy;
    Ok(PoincareReport {
        p: pe,
        center: center.to_string(),
        radius: radius.to_string(),
        level,
        mu,
        mean,
        integral,
        integral_err,
        energy,
        diameter,
        ratio: safe_div(integral, scale),
        ratio_err: safe_div(integral_err, scale),
        mean_form_lhs: integral / mu,
        mean_form_rhs,
        mean_form_ratio: safe_div(integral / mu, mean_form_rhs),
        mean_form_ratio_err: safe_div(integral_err / mu, mean_form_rhs),
    })
}

/// Power-law fit of `n ↦ ∫_{B(q_5, 3^{-n})} |f_cross|^p dμ` against
/// `r = 3^{-n}`. The central ball is the cell `5…5`, so every value comes
/// from the exact integral.
pub fn sharpness_fit(p: Exponent, ns: impl IntoIterator<Item = u32>) -> Result<FitResult> {
    let cross = PaFunction::<f64>::cross();
    let mut points = Vec::new();
    for n in ns {
        let w = Address::from_digits(&vec![Digit::CENTER.get(); n as usize])?;
        let value = mu_integral_on_cell(&cross, &w, p, 0.0)?;
        points.push((3f64.powi(-(n as i32)), value));
    }
    power_fit(points)
}

/// Central ball `B(q_5, 3^{-n})`.
pub fn central_radius(n: u32) -> Radius {
    Ratio::new(1, 3i64.pow(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::measure::D_H;
    use rand::{Rng, SeedableRng};

    fn ex(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn central_cross_ratio_is_two_over_twentyone() {
        let f = PaFunction::<f64>::cross();
        for n in 1..=4 {
            let r = poincare_check(&f, &LatticePoint::center(), &central_radius(n), ex(2.0), 1).unwrap();
            assert!((r.ratio - 2.0 / 21.0).abs() < 1e-9, "n={n}: {r:?}");
            assert_eq!(r.integral_err, 0.0);
            assert!(r.mean.abs() < 1e-15);
            assert!((r.diameter - 2.0 * 3f64.powi(-(n as i32))).abs() < 1e-15);
            assert!(r.mean_form_ratio <= 1.0);
        }
    }

    #[test]
    fn constant_gives_zero() {
        let f = PaFunction::constant(3.0f64, 1).unwrap();
        let r = poincare_check(&f, &LatticePoint::center(), &central_radius(1), ex(2.0), 1).unwrap();
        assert_eq!((r.integral, r.energy, r.ratio, r.mean_form_ratio), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn off_center_balls_satisfy_the_mean_form() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let g = crate::geometry::graph::shared_graph(2).unwrap();
        for _ in 0..8 {
            let f = PaFunction::<f64>::random(1, &mut rng).unwrap();
            let c = g.point(rng.gen_range(0..g.vertex_count()));
            let k = rng.gen_range(0..=2);
            let r = poincare_check(&f, &c, &central_radius(k), ex(2.0), 2).unwrap();
            assert!(r.mean_form_ratio <= 1.0 + r.mean_form_ratio_err, "{r:?}");
        }
    }

    #[test]
    fn sharpness_exponent() {
        for p in [1.0, 2.0, 3.0] {
            let fit = sharpness_fit(ex(p), 1..=5).unwrap();
            assert!((fit.exponent - (p + D_H)).abs() < 1e-9, "p={p}: {fit:?}");
            assert!(fit.residual < 1e-9);
        }
        let fit = sharpness_fit(ex(2.0), 1..=5).unwrap();
        assert!((fit.constant - 8.0 / 21.0).abs() < 1e-9);
    }
}

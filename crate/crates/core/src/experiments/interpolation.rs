//! The averaging interpolant `Φ_n = Σ_v f_n(v)·u_v` and upper bounds for the
//! `K`-functional between `L^p` and the energy space.

use serde::Serialize;

use crate::besov::{ks_energy, CellSamples};
use crate::energy::{energy_limit, Region};
use crate::error::{Error, Result};
use crate::function::cell::CellFunction;
use crate::function::integral::{mu_integral, mu_integral_shifted, mu_mean};
use crate::function::pa::PaFunction;
use crate::function::sampler::CrossSampler;
use crate::geometry::address::{Address, Anchor, Digit};
use crate::geometry::graph::shared_graph;
use crate::geometry::lattice::LatticePoint;
use crate::geometry::measure::alpha_p;
use crate::geometry::metric::Radius;
use crate::scalar::{Exponent, Scalar};

/// `⨍_{K_w} f dμ` of a function that is 0-PA on `K_w`.
fn cross_mean(v: &[f64; 5]) -> f64 {
    v[4] + v[..4].iter().map(|x| x - v[4]).sum::<f64>() / 7.0
}

/// Cell means at level `m`, in lexicographic order.
fn cell_means<S: CrossSampler<f64>>(f: &S, m: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(5usize.pow(m));
    let mut stack = vec![(0u32, f.root())];
    while let Some((k, s)) = stack.pop() {
        if k == m {
            out.push(cross_mean(&f.vertex_values(&s)));
            continue;
        }
        for d in Digit::ALL.into_iter().rev() {
            stack.push((k + 1, f.child(&s, d)));
        }
    }
    out
}

/// Assembles `Φ_n` from the means of the level-`(n+1)` cells. Every cell of
/// that level has the same mass, so the star average is the plain average
/// of the means of the cells in the star.
fn assemble(n: u32, means: &[f64]) -> Result<PaFunction<f64>> {
    let coarse = shared_graph(n)?;
    let fine = shared_graph(n + 1)?;
    let mut sum = vec![0.0; coarse.vertex_count()];
    let mut count = vec![0u32; coarse.vertex_count()];
    for (c, mean) in means.iter().enumerate() {
        for id in fine.cell_vertices(c) {
            if let Some(v) = coarse.find_vertex(&fine.point(id)) {
                sum[v] += mean;
                count[v] += 1;
            }
        }
    }
    let values = sum.iter().zip(&count).map(|(s, &k)| s / k as f64).collect();
    PaFunction::on_graph(coarse, values)
}

/// Averages consecutive blocks of `5^k` values.
fn coarsen(values: &[f64], k: u32) -> Vec<f64> {
    let block = 5usize.pow(k);
    values.chunks(block).map(|c| c.iter().sum::<f64>() / block as f64).collect()
}

/// `Φ_n` for a function given by a sampler, with star averages computed
/// from cell means at `quad_level ≥ n + 1`. The means are exact when the
/// sampler is piecewise affine at `quad_level`.
pub fn phi_n<S: CrossSampler<f64>>(f: &S, n: u32, quad_level: u32) -> Result<PaFunction<f64>> {
    if quad_level < n + 1 {
        return Err(Error::Resolution(format!("Φ_{n} needs cell means at level ≥ {}, got {quad_level}", n + 1)));
    }
    let means = coarsen(&cell_means(f, quad_level), quad_level - n - 1);
    assemble(n, &means)
}

/// `Φ_n` for cell data, which must live at level `≥ n + 2`.
pub fn phi_n_cells(f: &CellFunction<f64>, n: u32) -> Result<PaFunction<f64>> {
    if f.level() < n + 2 {
        return Err(Error::Resolution(format!("Φ_{n} of cell data needs level ≥ {}, got {}", n + 2, f.level())));
    }
    assemble(n, &coarsen(f.values(), f.level() - n - 1))
}

/// The hat function `u_v` on `V̄_n`: 1 at the vertex `v`, 0 at the others.
pub fn hat<T: Scalar>(n: u32, v: usize) -> Result<PaFunction<T>> {
    let g = shared_graph(n)?;
    g.check_vertex(v)?;
    let mut values = vec![T::zero(); g.vertex_count()];
    values[v] = T::one();
    PaFunction::on_graph(g, values)
}

/// `Σ_{v ∈ V_n} u_v(x)`, evaluated hat by hat.
pub fn partition_of_unity<T: Scalar>(n: u32, x: &LatticePoint) -> Result<T> {
    let g = shared_graph(n)?;
    let mut total = T::zero();
    for v in 0..g.vertex_count() {
        total = total + hat::<T>(n, v)?.evaluate_point(x)?;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KFuncPoint {
    pub r: f64,
    /// `E_p(f, r)^{1/p}`, with the quadrature bracket.
    pub ks: f64,
    pub ks_lo: f64,
    pub ks_hi: f64,
    /// Upper bound for `K(f, r^{α_p})`.
    pub k_up: f64,
    pub ratio: f64,
    /// Level of the winning interpolant; `None` when the mean wins.
    pub chosen_n: Option<u32>,
    /// `‖f − Φ_n‖_p` of the winning decomposition.
    pub remainder: f64,
    /// `E_p(Φ_n)^{1/p}` of the winning decomposition.
    pub smooth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KFuncReport {
    pub p: f64,
    pub theta: f64,
    pub level: u32,
    pub points: Vec<KFuncPoint>,
    /// Largest ratio over the smallest.
    pub band: f64,
}

/// The `n` with `r ≈ 2·3^{-n}`.
fn nearest_level(r: f64) -> u32 {
    (2.0 / r).log(3.0).round().max(0.0) as u32
}

/// `K`-functional upper bounds on a radius grid. Each `r ≈ 2·3^{-n_0}` tries
/// the decompositions `(f − Φ_n, Φ_n)` for `|n − n_0| ≤ 1` and
/// `(f − ⨍f, ⨍f)`; `E_p(f, r)` is sampled at level `m`.
pub fn k_functional_scan(
    f: &PaFunction<f64>,
    p: Exponent,
    alpha: f64,
    grid: &[Radius],
    m: u32,
) -> Result<KFuncReport> {
    let pe = p.get();
    let ap = alpha_p(p);
    let inv = 1.0 / pe;
    let samples = CellSamples::from_sampler(f, m);
    let mean = mu_mean(f);
    let mean_norm = mu_integral_shifted(f, p, mean).powf(inv);

    let mut cache: Vec<(u32, f64, f64)> = Vec::new();
    let mut candidate = |n: u32| -> Result<(f64, f64)> {
        if let Some(&(_, a, b)) = cache.iter().find(|c| c.0 == n) {
            return Ok((a, b));
        }
        let phi = phi_n(f, n, (n + 1).max(f.level()))?;
        let remainder = mu_integral(&f.sub(&phi)?, p).powf(inv);
        let smooth = energy_limit(&phi, p, &Region::Whole)?.powf(inv);
        cache.push((n, remainder, smooth));
        Ok((remainder, smooth))
    };

    let mut points = Vec::with_capacity(grid.len());
    for r in grid {
        let ks = ks_energy(&samples, r, p)?;
        let rf = ks.r;
        let t = rf.powf(ap);
        let mut best = (mean_norm, None, mean_norm, 0.0);
        let n0 = nearest_level(rf);
        for n in n0.saturating_sub(1)..=n0 + 1 {
            let (remainder, smooth) = candidate(n)?;
            let k = remainder + t * smooth;
            if k < best.0 {
                best = (k, Some(n), remainder, smooth);
            }
        }
        let value = ks.value.powf(inv);
        points.push(KFuncPoint {
            r: rf,
            ks: value,
            ks_lo: ks.lo().powf(inv),
            ks_hi: ks.hi().powf(inv),
            k_up: best.0,
            ratio: if best.0 == 0.0 { 0.0 } else { best.0 / value },
            chosen_n: best.1,
            remainder: best.2,
            smooth: best.3,
        });
    }
    let ratios: Vec<f64> = points.iter().map(|q| q.ratio).filter(|x| *x > 0.0).collect();
    let band = if ratios.is_empty() {
        1.0
    } else {
        ratios.iter().copied().fold(0.0, f64::max) / ratios.iter().copied().fold(f64::INFINITY, f64::min)
    };
    Ok(KFuncReport { p: pe, theta: alpha / ap, level: m, points, band })
}

/// The star `K*_{n+1}(v)`: level-`(n+1)` cells having `v` as a vertex.
pub fn star_cells(n: u32, v: &LatticePoint) -> Vec<Address> {
    let mut out = Vec::new();
    let mut stack = vec![(Address::root(), Anchor::Center)];
    while let Some((w, a)) = stack.pop() {
        if !w.map().square_contains(v) {
            continue;
        }
        if w.level() == n + 1 {
            if Digit::ALL.iter().any(|&d| w.vertex(d) == *v) {
                out.push(w);
            }
            continue;
        }
        for d in Digit::ALL {
            stack.push((w.child(d), a.step(d)));
        }
    }
    out
}

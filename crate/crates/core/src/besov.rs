//! Korevaar–Schoen double-integral energies `E_p(f, r)`, Besov–Lipschitz
//! seminorm scans and the BV functional.
//!
//! `E_p(f, r) = ∫_K ⨍_{B(x,r)} |f(y) − f(x)|^p dμ(y) dμ(x)` is evaluated by
//! a cell quadrature at level `m`: `x` and `y` are replaced by the
//! attachment vertices of their cells and every ball measure is exact. The
//! reported bounds are rigorous for functions whose range on each cell lies
//! between its vertex values, which holds for every sampler in this crate:
//!
//! * `|f(y) − f(x)|` moves by at most the two cells' oscillations;
//! * a point of a level-`m` cell lies within `h = 2·3^{-m}` of its anchor, so
//!   a cell pair at anchor distance `d` is inside the ball when
//!   `d + 2h ≤ r` and outside when `d − 2h > r`;
//! * `B(a, r − h) ⊂ B(x, r) ⊂ B(a, r + h)` brackets the normalising measure.

use std::collections::VecDeque;
use std::io::Write;

use num_rational::Ratio;
use serde::Serialize;

use crate::energy::energy_limit;
use crate::energy::Region;
use crate::error::{Error, Result};
use crate::fit::{log_log_fit, LineFit};
use crate::function::cell::CellFunction;
use crate::function::pa::PaFunction;
use crate::function::sampler::CrossSampler;
use crate::geometry::address::Digit;
use crate::geometry::ball::BallProfile;
use crate::geometry::graph::{shared_graph, CableGraph};
use crate::geometry::measure::{alpha_p, D_H};
use crate::geometry::metric::Radius;
use crate::scalar::{chunked_sum, Exponent, Real};

pub use crate::geometry::ball::ball_measure;

/// Level-`m` samples: the value at each cell's anchor and the oscillation
/// of the function over the cell, in lexicographic cell order.
#[derive(Clone, Debug)]
pub struct CellSamples<T> {
    level: u32,
    sampling: Sampling,
    values: Vec<T>,
    osc: Vec<T>,
}

/// Which point of each cell stands in for the cell in the quadrature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// The attachment vertex, through which the geodesic from `q_5` enters.
    Anchor,
    /// The cell's center `Ψ_w(q_5)`, within `3^{-m}` of every point of the
    /// cell. Anchors are extreme points of their cells and bias the sum at
    /// radii close to the resolution; centers roughly halve that bias.
    #[default]
    Center,
}

impl Sampling {
    /// Largest distance, in level-`m` steps, from the sample point to a
    /// point of its cell.
    fn reach(self) -> u64 {
        match self {
            Sampling::Anchor => 2,
            Sampling::Center => 1,
        }
    }
}

impl<T: Real> CellSamples<T> {
    pub fn from_sampler<S: CrossSampler<T>>(f: &S, m: u32) -> Self {
        Self::from_sampler_with(f, m, Sampling::default())
    }

    pub fn from_sampler_with<S: CrossSampler<T>>(f: &S, m: u32, sampling: Sampling) -> Self {
        let mut values = Vec::with_capacity(5usize.pow(m));
        let mut osc = Vec::with_capacity(5usize.pow(m));
        let mut stack = vec![(0u32, crate::geometry::address::Anchor::Center, f.root())];
        while let Some((k, a, s)) = stack.pop() {
            if k == m {
                let v = f.vertex_values(&s);
                let hi = v.iter().copied().fold(T::neg_infinity(), T::max);
                let lo = v.iter().copied().fold(T::infinity(), T::min);
                values.push(match sampling {
                    Sampling::Anchor => v[a.slot()],
                    Sampling::Center => v[4],
                });
                osc.push(hi - lo);
                continue;
            }
            for d in Digit::ALL.into_iter().rev() {
                stack.push((k + 1, a.step(d), f.child(&s, d)));
            }
        }
        Self { level: m, sampling, values, osc }
    }

    /// A piecewise-constant function: zero oscillation on every cell. The
    /// values are taken as given; only the classification of cell pairs
    /// uses the sample points.
    pub fn from_cells(f: &CellFunction<T>) -> Self {
        Self {
            level: f.level(),
            sampling: Sampling::default(),
            values: f.values().to_vec(),
            osc: vec![T::zero(); f.values().len()],
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn oscillations(&self) -> &[T] {
        &self.osc
    }
}

/// One quadrature value with its error bars: the true value lies in
/// `[value − err_lo, value + err_hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsValue {
    pub r: f64,
    pub value: f64,
    pub err_lo: f64,
    pub err_hi: f64,
}

impl KsValue {
    pub fn lo(&self) -> f64 {
        (self.value - self.err_lo).max(0.0)
    }

    pub fn hi(&self) -> f64 {
        self.value + self.err_hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo() <= x && x <= self.hi()
    }
}

fn radius_f64(r: &Radius) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Checks `3^{-m} ≤ r/3`. Radii of at least the diameter need no
/// resolution, as every ball is all of `K`.
fn check_resolution(r: &Radius, m: u32) -> Result<()> {
    if *r <= Ratio::from_integer(0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if *r >= Ratio::from_integer(2) {
        return Ok(());
    }
    let scaled = *r * Ratio::from_integer(3i64.pow(m));
    if scaled < Ratio::from_integer(3) {
        return Err(Error::Resolution(format!("level {m} cannot resolve radius {r}; need 3^-m <= r/3")));
    }
    Ok(())
}

struct Sums {
    est: f64,
    lo: f64,
    hi: f64,
}

/// `E_p(f, r)` with rigorous error bounds.
pub fn ks_energy<T: Real>(f: &CellSamples<T>, r: &Radius, p: Exponent) -> Result<KsValue> {
    let m = f.level;
    check_resolution(r, m)?;
    let g = shared_graph(m).or_else(|_| CableGraph::build(m).map(std::sync::Arc::new))?;
    let n = f.values.len();
    let vals: Vec<f64> = f.values.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    let osc: Vec<f64> = f.osc.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    let pw = |x: f64| <f64 as crate::scalar::Scalar>::abs_pow(&x, p);
    let weight = 5f64.powi(-2 * m as i32);

    let sums: Vec<Sums> = if *r >= Ratio::from_integer(2) {
        par_map(n, |w| {
            let mut s = Sums { est: 0.0, lo: 0.0, hi: 0.0 };
            for v in 0..n {
                let d = (vals[v] - vals[w]).abs();
                let spread = osc[v] + osc[w];
                s.est += pw(d);
                s.lo += pw((d - spread).max(0.0));
                s.hi += pw(d + spread);
            }
            s
        })
    } else {
        let anchors = match f.sampling {
            Sampling::Anchor => g.anchors(),
            Sampling::Center => (0..n).map(|c| g.cell_vertices(c)[4]).collect(),
        };
        let slack = f.sampling.reach();
        // cells grouped by sample vertex
        let mut offsets = vec![0usize; g.vertex_count() + 1];
        for &a in &anchors {
            offsets[a + 1] += 1;
        }
        for i in 0..g.vertex_count() {
            offsets[i + 1] += offsets[i];
        }
        let mut by_anchor = vec![0usize; n];
        let mut fill = offsets.clone();
        for (c, &a) in anchors.iter().enumerate() {
            by_anchor[fill[a]] = c;
            fill[a] += 1;
        }
        let rf = radius_f64(r);
        let h = slack as f64 * 3f64.powi(-(m as i32));
        let scaled = *r * Ratio::from_integer(3i64.pow(m));
        let reach = scaled.floor().to_integer() as u64;
        let nv = g.vertex_count();
        par_map_init(
            n,
            || Scratch { dist: vec![u64::MAX; nv], touched: Vec::new(), queue: VecDeque::new() },
            |scratch, w| {
                let a = anchors[w];
                let profile = BallProfile::new(&g.point(a)).expect("anchors lie on K");
                let mu = profile.measure_f64(rf);
                let mu_lo = profile.measure_f64(rf - h);
                let mu_hi = profile.measure_f64(rf + h);
                let mut s = Sums { est: 0.0, lo: 0.0, hi: 0.0 };
                let Scratch { dist, touched, queue } = scratch;
                for &t in touched.iter() {
                    dist[t] = u64::MAX;
                }
                touched.clear();
                dist[a] = 0;
                touched.push(a);
                queue.push_back(a);
                while let Some(u) = queue.pop_front() {
                    let du = dist[u];
                    for &v in &by_anchor[offsets[u]..offsets[u + 1]] {
                        let d = (vals[v] - vals[w]).abs();
                        let spread = osc[v] + osc[w];
                        if du <= reach {
                            s.est += pw(d);
                        }
                        if du + 2 * slack <= reach {
                            s.lo += pw((d - spread).max(0.0));
                        }
                        s.hi += pw(d + spread);
                    }
                    if du < reach + 2 * slack {
                        for (x, _) in g.neighbors(u) {
                            if dist[x] == u64::MAX {
                                dist[x] = du + 1;
                                touched.push(x);
                                queue.push_back(x);
                            }
                        }
                    }
                }
                Sums { est: s.est / mu, lo: s.lo / mu_hi, hi: s.hi / mu_lo }
            },
        )
    };
    let total = |k: fn(&Sums) -> f64| chunked_sum(sums.len(), 256, |rg| rg.map(|i| k(&sums[i])).sum::<f64>());
    let (est, lo, hi) = (total(|s| s.est) * weight, total(|s| s.lo) * weight, total(|s| s.hi) * weight);
    Ok(KsValue { r: radius_f64(r), value: est, err_lo: (est - lo).max(0.0), err_hi: (hi - est).max(0.0) })
}

struct Scratch {
    dist: Vec<u64>,
    touched: Vec<usize>,
    queue: VecDeque<usize>,
}

fn par_map_init<U: Send, S, I, F>(n: usize, init: I, f: F) -> Vec<U>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map_init(init, f).collect()
}

fn par_map<U: Send, F: Fn(usize) -> U + Sync + Send>(n: usize, f: F) -> Vec<U> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// `r = 2·3^{-k}` for `k = 0..=m−2`.
pub fn default_grid(m: u32) -> Vec<Radius> {
    (0..=m.saturating_sub(2)).map(|k| Ratio::new(2, 3i64.pow(k))).collect()
}

/// `r = 3^{-k}` for `k` in the given range.
pub fn triadic_grid(ks: impl IntoIterator<Item = u32>) -> Vec<Radius> {
    ks.into_iter().map(|k| Ratio::new(1, 3i64.pow(k))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsPoint {
    #[serde(flatten)]
    pub energy: KsValue,
    /// `r^{-α}·E_p(f, r)^{1/p}` and its bounds.
    pub scaled: f64,
    pub scaled_lo: f64,
    pub scaled_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsReport {
    pub p: f64,
    pub alpha: f64,
    pub level: u32,
    pub points: Vec<KsPoint>,
    /// Supremum of the scaled values over the whole grid.
    pub seminorm: f64,
    pub seminorm_lo: f64,
    pub seminorm_hi: f64,
    /// Supremum over the radii within a factor 10 of the smallest one.
    pub limsup_proxy: f64,
    /// Fit of `ln(scaled^p)` against `ln r`.
    pub slope: Option<LineFit>,
}

impl KsReport {
    pub fn radii(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.energy.r).collect()
    }

    /// `r^{-pα}·E_p(f, r)` per radius.
    pub fn normalised(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.scaled.powf(self.p)).collect()
    }
}

/// `sup_r r^{-α}·E_p(f, r)^{1/p}` over a grid, with propagated bounds.
pub fn besov_seminorm<T: Real>(f: &CellSamples<T>, alpha: f64, p: Exponent, grid: &[Radius]) -> Result<KsReport> {
    if grid.is_empty() {
        return Err(Error::Domain("empty radius grid".into()));
    }
    let pe = p.get();
    let mut points = Vec::with_capacity(grid.len());
    for r in grid {
        if *r > Ratio::from_integer(2) {
            return Err(Error::Domain(format!("grid radius {r} exceeds the diameter")));
        }
        let e = ks_energy(f, r, p)?;
        let factor = e.r.powf(-alpha);
        points.push(KsPoint {
            energy: e,
            scaled: factor * e.value.powf(1.0 / pe),
            scaled_lo: factor * e.lo().powf(1.0 / pe),
            scaled_hi: factor * e.hi().powf(1.0 / pe),
        });
    }
    let max = |k: fn(&KsPoint) -> f64| points.iter().map(k).fold(0.0, f64::max);
    let rmin = points.iter().map(|pt| pt.energy.r).fold(f64::INFINITY, f64::min);
    let limsup_proxy = points
        .iter()
        .filter(|pt| pt.energy.r <= 10.0 * rmin)
        .map(|pt| pt.scaled)
        .fold(0.0, f64::max);
    let rs: Vec<f64> = points.iter().map(|pt| pt.energy.r).collect();
    let ys: Vec<f64> = points.iter().map(|pt| pt.scaled.powf(pe)).collect();
    Ok(KsReport {
        p: pe,
        alpha,
        level: f.level,
        seminorm: max(|pt| pt.scaled),
        seminorm_lo: max(|pt| pt.scaled_lo),
        seminorm_hi: max(|pt| pt.scaled_hi),
        limsup_proxy,
        slope: log_log_fit(&rs, &ys),
        points,
    })
}

/// The BV scan: `p = 1` and `α = d_h`, so the scaled values are
/// `r^{-d_h}·E_1(f, r)`.
pub fn bv_functional<T: Real>(f: &CellSamples<T>, grid: &[Radius]) -> Result<KsReport> {
    let one = Exponent::new(1.0)?;
    debug_assert!((alpha_p(one) - D_H).abs() < 1e-15);
    besov_seminorm(f, D_H, one, grid)
}

/// CSV with columns `p, alpha, r, value, err_lo, err_hi`.
pub fn write_ks_csv<W: Write>(report: &KsReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["p", "alpha", "r", "value", "err_lo", "err_hi"]).map_err(fmt)?;
    for pt in &report.points {
        let e = &pt.energy;
        w.write_record([report.p, report.alpha, e.r, e.value, e.err_lo, e.err_hi].map(|x| x.to_string()))
            .map_err(fmt)?;
    }
    w.flush()?;
    Ok(())
}

/// Observed constants in `c·S(f) ≤ E_p(f) ≤ C·S(f)` where
/// `S(f) = sup_r r^{-pα_p}·E_p(f, r)` over a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub level: u32,
    /// `E_p(f) / S(f)` per function.
    pub ratios: Vec<f64>,
    /// `C/c`: the largest ratio over the smallest.
    pub spread: f64,
}

pub fn two_sided_comparison(fs: &[PaFunction<f64>], p: Exponent, grid: &[Radius], m: u32) -> Result<Comparison> {
    let alpha = alpha_p(p);
    let mut ratios = Vec::with_capacity(fs.len());
    for f in fs {
        let e = energy_limit(f, p, &Region::Whole)?;
        let samples = CellSamples::from_sampler(f, m);
        let report = besov_seminorm(&samples, alpha, p, grid)?;
        let sup = report.normalised().into_iter().fold(0.0, f64::max);
        if sup > 0.0 {
            ratios.push(e / sup);
        }
    }
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Comparison { level: m, spread: if ratios.is_empty() { 1.0 } else { hi / lo }, ratios })
}

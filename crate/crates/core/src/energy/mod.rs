//! Discrete `p`-energies on `V_m` and on convex regions, their limits for
//! piecewise-affine functions, the `L^∞` energy and `L^p(ν)` norms of edge
//! densities.
//!
//! Every level-`m` edge joins a cell's center to one of its corners, so the
//! ordered-pair sum `½·3^{(p−1)m}·Σ_{x∼y}|f(x)−f(y)|^p` is evaluated as
//! `3^{(p−1)m}` times the sum over undirected edges.

mod region;

use std::io::Write;
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fit::{log_linear_fit, LineFit};
use crate::function::density::EdgeDensity;
use crate::function::pa::PaFunction;
use crate::function::sampler::{sample_on_graph, CrossSampler, Pulled};
use crate::geometry::address::{Address, Digit};
use crate::geometry::graph::{shared_graph, CableGraph};
use crate::geometry::measure::MeasureContext;
use crate::geometry::metric::Radius;
use crate::scalar::{chunked_sum, pairwise_sum, pow3, Exponent, Scalar};

pub use region::Region;
pub(crate) use region::distances_from;

/// Cells per parallel work item in graph-based sums.
const EDGE_CHUNK: usize = 4096;

/// Depth at which streaming descents are split into independent tasks.
const SPLIT_DEPTH: u32 = 5;

fn check_len<T>(g: &CableGraph, values: &[T]) -> Result<()> {
    if values.len() != g.vertex_count() {
        return Err(Error::Shape { expected: g.vertex_count(), found: values.len() });
    }
    Ok(())
}

/// `E_p^m(f)` for values on all of `V_m`.
pub fn discrete_energy<T: Scalar>(g: &CableGraph, values: &[T], p: Exponent) -> Result<T> {
    check_len(g, values)?;
    T::check_exponent(p)?;
    let sum = chunked_sum(g.edge_count(), EDGE_CHUNK, |range| {
        range.fold(T::zero(), |acc, e| {
            let (a, b) = g.edge_endpoints(e);
            acc + (values[a].clone() - values[b].clone()).abs_pow(p)
        })
    });
    Ok(T::energy_scale(p, g.level()) * sum)
}

/// `E_{A,p}^m(f)`: only edges with both endpoints in `A ∩ V_m` count.
pub fn discrete_energy_restricted<T: Scalar>(
    g: &CableGraph,
    values: &[T],
    region: &Region,
    p: Exponent,
) -> Result<T> {
    if *region == Region::Whole {
        return discrete_energy(g, values, p);
    }
    check_len(g, values)?;
    T::check_exponent(p)?;
    let inside = region.members(g)?;
    let sum = chunked_sum(g.edge_count(), EDGE_CHUNK, |range| {
        range.fold(T::zero(), |acc, e| {
            let (a, b) = g.edge_endpoints(e);
            if inside[a] && inside[b] {
                acc + (values[a].clone() - values[b].clone()).abs_pow(p)
            } else {
                acc
            }
        })
    });
    Ok(T::energy_scale(p, g.level()) * sum)
}

/// `E_∞^m(f) = 3^m·max_{x∼y}|f(x) − f(y)|`, optionally over a region.
pub fn energy_infty<T: Scalar>(g: &CableGraph, values: &[T], region: Option<&Region>) -> Result<T> {
    check_len(g, values)?;
    let inside = match region {
        Some(r) if *r != Region::Whole => Some(r.members(g)?),
        _ => None,
    };
    let mut best = T::zero();
    for e in 0..g.edge_count() {
        let (a, b) = g.edge_endpoints(e);
        if inside.as_ref().is_some_and(|f| !(f[a] && f[b])) {
            continue;
        }
        best = T::max_of(best, (values[a].clone() - values[b].clone()).magnitude());
    }
    Ok(pow3::<T>(g.level()) * best)
}

pub(crate) fn level_graph(m: u32) -> Result<Arc<CableGraph>> {
    shared_graph(m).or_else(|_| CableGraph::build(m).map(Arc::new))
}

/// `E_{A,p}(Φ)` for a piecewise-affine `Φ`: the energy at the first level
/// that resolves both `Φ` and the region, where the sequence is constant.
///
/// A ball whose radius is not triadic is never resolved and yields a
/// resolution error; [`gradient_norm`] handles such balls.
pub fn energy_limit<T: Scalar>(f: &PaFunction<T>, p: Exponent, region: &Region) -> Result<T> {
    let m = f.level().max(region.resolution()?);
    if m == f.level() {
        return discrete_energy_restricted(f.graph(), f.values(), region, p);
    }
    let g = level_graph(m)?;
    discrete_energy_restricted(&g, &f.restrict(m)?, region, p)
}

/// `∫_{A∩S}|g|^p dν`. Edges cut by a ball boundary contribute the exact
/// length of their intersection with the ball.
pub fn gradient_norm<T: Scalar>(density: &EdgeDensity<T>, p: Exponent, region: &Region) -> Result<T> {
    T::check_exponent(p)?;
    let n = density.level();
    match region {
        Region::Whole => {
            let vals = density.values();
            let sum = chunked_sum(vals.len(), EDGE_CHUNK, |r| {
                r.fold(T::zero(), |acc, e| acc + vals[e].abs_pow(p))
            });
            Ok(sum * MeasureContext::new(n).edge_weight::<T>())
        }
        Region::Cell(w) => {
            let level = n.max(w.level());
            let d = if level == n { density.clone() } else { density.refine(level)? };
            let vals = d.values();
            let cells = w.descendant_range(level);
            let sum = vals[4 * cells.start as usize..4 * cells.end as usize]
                .iter()
                .fold(T::zero(), |acc, g| acc + g.abs_pow(p));
            Ok(sum * MeasureContext::new(level).edge_weight::<T>())
        }
        Region::Vertices { level, .. } => {
            if *level < n {
                return Err(Error::Level { requested: *level, minimum: n });
            }
            let d = if *level == n { density.clone() } else { density.refine(*level)? };
            let g = d.graph();
            let inside = region.members(g)?;
            let sum = (0..g.edge_count()).fold(T::zero(), |acc, e| {
                let (a, b) = g.edge_endpoints(e);
                if inside[a] && inside[b] {
                    acc + d.values()[e].abs_pow(p)
                } else {
                    acc
                }
            });
            Ok(sum * MeasureContext::new(*level).edge_weight::<T>())
        }
        Region::Ball { center, radius } => {
            let g = density.graph();
            let dist = distances_from(g, center)?;
            let scale = n.max(center.scale());
            let powers: Vec<T> = density.values().iter().map(|x| x.abs_pow(p)).collect();
            Ok(ball_edge_mass(g, &powers, &dist, scale, radius))
        }
    }
}

/// `Σ_e w_e·ν(e ∩ B)` for a ball given by the distances (in steps of
/// `3^{-scale}`, `scale ≥ g.level()`) from its center to every vertex.
///
/// On an edge `[a, b]` the distance to the center is `d(x, π) + |t − t_π|`
/// where the foot `π` sits at `t_π = (d_a − d_b + len)/2` from `a`, so the
/// covered part is an interval computed exactly in integer arithmetic.
pub(crate) fn ball_edge_mass<T: Scalar>(g: &CableGraph, weights: &[T], dist: &[u64], scale: u32, radius: &Radius) -> T {
    let n = g.level();
    // work in units of 1/(2·den) steps of length 3^-scale
    let unit = 2 * *radius.denom() as i128;
    let len = 3i128.pow(scale - n) * unit;
    let reach = 2 * *radius.numer() as i128 * 3i128.pow(scale);
    let den = unit * 3i128.pow(scale);
    let full = MeasureContext::new(n).edge_weight::<T>();
    (0..g.edge_count()).fold(T::zero(), |acc, e| {
        if weights[e] == T::zero() {
            return acc;
        }
        let (a, b) = g.edge_endpoints(e);
        let (da, db) = (dist[a] as i128 * unit, dist[b] as i128 * unit);
        let foot = (da - db + len) / 2;
        let rho = reach - (da + db - len) / 2;
        if rho <= 0 {
            return acc;
        }
        let covered = (foot + rho).min(len) - (foot - rho).max(0);
        if covered <= 0 {
            return acc;
        }
        let nu = if covered == len { full.clone() } else { ratio::<T>(covered, den) };
        acc + weights[e].clone() * nu
    })
}

fn ratio<T: Scalar>(num: i128, den: i128) -> T {
    let g = num_integer::gcd(num, den);
    let (n, d) = (num / g, den / g);
    match (i64::try_from(n), i64::try_from(d)) {
        (Ok(n), Ok(d)) => T::from_ratio(n, d),
        _ => T::from_f64(n as f64 / d as f64).expect("finite ratio"),
    }
}

fn cell_energy<T: Scalar>(v: &[T; 5], p: Exponent) -> T {
    (0..4).fold(T::zero(), |acc, k| acc + (v[k].clone() - v[4].clone()).abs_pow(p))
}

fn descend_sum<T: Scalar, S: CrossSampler<T>>(f: &S, s: &S::State, depth: u32, p: Exponent) -> T {
    if f.is_constant(s) {
        return T::zero();
    }
    if depth == 0 {
        return cell_energy(&f.vertex_values(s), p);
    }
    let parts: [T; 5] = std::array::from_fn(|i| descend_sum(f, &f.child(s, Digit::ALL[i]), depth - 1, p));
    pairwise_sum(&parts)
}

fn descend_max<T: Scalar, S: CrossSampler<T>>(f: &S, s: &S::State, depth: u32) -> T {
    if f.is_constant(s) {
        return T::zero();
    }
    if depth == 0 {
        let v = f.vertex_values(s);
        return (0..4).fold(T::zero(), |acc, k| T::max_of(acc, (v[k].clone() - v[4].clone()).magnitude()));
    }
    Digit::ALL
        .iter()
        .map(|&d| descend_max(f, &f.child(s, d), depth - 1))
        .fold(T::zero(), T::max_of)
}

/// States of all level-`k` cells in lexicographic order.
fn frontier<T: Scalar, S: CrossSampler<T>>(f: &S, k: u32) -> Vec<S::State> {
    let mut states = vec![f.root()];
    for _ in 0..k {
        states = states.iter().flat_map(|s| Digit::ALL.map(|d| f.child(s, d))).collect();
    }
    states
}

/// `E_p^m(f)` computed cell by cell without building `V_m`.
///
/// Work is split into the `5^k` subtrees below a fixed depth and combined in
/// a fixed order, so the result is bit-identical for every thread count.
pub fn streaming_energy<T: Scalar, S: CrossSampler<T>>(f: &S, p: Exponent, m: u32) -> Result<T> {
    T::check_exponent(p)?;
    let k = m.min(SPLIT_DEPTH);
    let states = frontier(f, k);
    let sum = chunked_sum(states.len(), 1, |r| {
        r.fold(T::zero(), |acc, i| acc + descend_sum(f, &states[i], m - k, p))
    });
    Ok(T::energy_scale(p, m) * sum)
}

/// `E_∞^m(f)` computed cell by cell.
pub fn streaming_energy_infty<T: Scalar, S: CrossSampler<T>>(f: &S, m: u32) -> T {
    use rayon::prelude::*;
    let k = m.min(SPLIT_DEPTH);
    let states = frontier(f, k);
    let best = states
        .par_iter()
        .map(|s| descend_max(f, s, m - k))
        .collect::<Vec<T>>()
        .into_iter()
        .fold(T::zero(), T::max_of);
    pow3::<T>(m) * best
}

/// Number of level-`m` edges on which `f` is not constant, and their total
/// `ν`-length `count·3^{-m}`.
pub fn support_measure<T: Scalar, S: CrossSampler<T>>(f: &S, m: u32) -> (u64, BigRational) {
    fn walk<T: Scalar, S: CrossSampler<T>>(f: &S, s: &S::State, depth: u32) -> u64 {
        if f.is_constant(s) {
            return 0;
        }
        if depth == 0 {
            let v = f.vertex_values(s);
            return (0..4).filter(|&k| v[k] != v[4]).count() as u64;
        }
        Digit::ALL.iter().map(|&d| walk(f, &f.child(s, d), depth - 1)).sum()
    }
    let count = walk(f, &f.root(), m);
    let nu = BigRational::from_integer(count.into()) * MeasureContext::new(m).edge_weight::<BigRational>();
    (count, nu)
}

fn serialize_exponent<S: Serializer>(p: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if p.is_finite() {
        s.serialize_f64(*p)
    } else {
        s.serialize_str("inf")
    }
}

/// One row of an energy profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    /// `f64::INFINITY` for the `L^∞` energy.
    #[serde(serialize_with = "serialize_exponent")]
    pub p: f64,
    pub level: u32,
    pub region: String,
    pub energy: f64,
    /// Whether the energies up to this level were nondecreasing.
    pub monotone_ok: bool,
}

/// Nondecreasing up to the scalar's rounding tolerance.
fn non_decreasing(prev: f64, next: f64, tol: f64) -> bool {
    next >= prev - tol * prev.abs()
}

/// Restricted energies of `f` at each level, with a running monotonicity flag.
/// `p = None` selects the `L^∞` energy.
pub fn energy_profile<T: Scalar, S: CrossSampler<T>>(
    f: &S,
    p: Option<Exponent>,
    region: &Region,
    levels: impl IntoIterator<Item = u32>,
) -> Result<Vec<EnergyReport>> {
    let mut out: Vec<EnergyReport> = Vec::new();
    for m in levels {
        let g = level_graph(m)?;
        let values = sample_on_graph(f, &g);
        let value = match p {
            Some(p) => discrete_energy_restricted(&g, &values, region, p)?,
            None => energy_infty(&g, &values, Some(region))?,
        };
        let energy = value.to_f64_lossy();
        let monotone_ok = out
            .last()
            .is_none_or(|prev| prev.monotone_ok && non_decreasing(prev.energy, energy, T::identity_tolerance()));
        out.push(EnergyReport {
            p: p.map_or(f64::INFINITY, Exponent::get),
            level: m,
            region: region.to_string(),
            energy,
            monotone_ok,
        });
    }
    Ok(out)
}

/// CSV with columns `p, level, region, energy, monotone_ok`.
pub fn write_energy_csv<W: Write>(reports: &[EnergyReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "level", "region", "energy", "monotone_ok"])
        .map_err(|e| Error::Format(e.to_string()))?;
    for r in reports {
        let p = if r.p.is_finite() { r.p.to_string() } else { "inf".to_string() };
        w.write_record([p, r.level.to_string(), r.region.clone(), r.energy.to_string(), r.monotone_ok.to_string()])
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    /// `E^m ≈ C·rate^m`.
    Diverging { rate: f64, fit: LineFit },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub p: f64,
    pub levels: Vec<u32>,
    pub energies: Vec<f64>,
    pub monotone: bool,
    #[serde(flatten)]
    pub verdict: Verdict,
}

/// Ratio `E^{last}/E^{first}` above which a scan is reported as diverging.
pub const DEFAULT_DIVERGENCE_RATIO: f64 = 10.0;

/// `E_p^m(f)` over a range of levels, with a bounded/diverging verdict.
pub fn energy_sup_scan<T: Scalar, S: CrossSampler<T>>(
    f: &S,
    p: Exponent,
    levels: impl IntoIterator<Item = u32>,
    divergence_ratio: f64,
) -> Result<ScanReport> {
    let levels: Vec<u32> = levels.into_iter().collect();
    let energies = levels
        .iter()
        .map(|&m| streaming_energy(f, p, m).map(|e| e.to_f64_lossy()))
        .collect::<Result<Vec<f64>>>()?;
    let monotone = energies.windows(2).all(|w| non_decreasing(w[0], w[1], T::identity_tolerance()));
    let first = energies.iter().copied().find(|e| *e > 0.0);
    let last = energies.last().copied().unwrap_or(0.0);
    let diverging = match first {
        Some(first) => last / first > divergence_ratio,
        None => false,
    };
    let verdict = if diverging {
        let xs: Vec<f64> = levels.iter().map(|&m| f64::from(m)).collect();
        match log_linear_fit(&xs, &energies) {
            Some(fit) => Verdict::Diverging { rate: fit.slope.exp(), fit },
            None => Verdict::Bounded,
        }
    } else {
        Verdict::Bounded
    };
    Ok(ScanReport { p: p.get(), levels, energies, monotone, verdict })
}

/// Both sides of `E_p^{m+1}(f) = 3^{p−1}·Σ_i E_p^m(f∘ψ_i)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfSimilarity<T> {
    pub lhs: T,
    pub rhs: T,
    pub pieces: [T; 5],
    pub gap: f64,
}

/// The left side is summed over the level-`m+1` graph, the right side over
/// the five pulled-back functions streamed separately.
pub fn self_similarity_check<T: Scalar, S: CrossSampler<T>>(
    f: &S,
    p: Exponent,
    m: u32,
) -> Result<SelfSimilarity<T>> {
    let g = level_graph(m + 1)?;
    let lhs = discrete_energy(&g, &sample_on_graph(f, &g), p)?;
    let mut pieces: Vec<T> = Vec::with_capacity(5);
    for d in Digit::ALL {
        let pulled = Pulled::new(f, Address::root().child(d));
        pieces.push(streaming_energy(&pulled, p, m)?);
    }
    let rhs = T::energy_scale(p, 1) * pieces.iter().fold(T::zero(), |a, x| a + x.clone());
    let (l, r) = (lhs.to_f64_lossy(), rhs.to_f64_lossy());
    let scale = l.abs().max(r.abs());
    let gap = if scale == 0.0 { 0.0 } else { (l - r).abs() / scale };
    let pieces: [T; 5] = pieces.try_into().expect("five pieces");
    Ok(SelfSimilarity { lhs, rhs, pieces, gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::cantor::CantorEdgeFunction;
    use crate::function::sampler::{Constant, DistanceToCenter};
    use crate::geometry::lattice::LatticePoint;
    use num_rational::Ratio;

    fn ex(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn cross_energy_is_four_at_every_level() {
        let cross = PaFunction::<BigRational>::cross();
        for m in 0..=4 {
            let g = shared_graph(m).unwrap();
            let v = sample_on_graph(&cross, &g);
            for p in [1.0, 2.0, 3.0] {
                assert_eq!(discrete_energy(&g, &v, ex(p)).unwrap(), q(4, 1));
            }
            assert_eq!(energy_infty(&g, &v, None).unwrap(), q(1, 1));
        }
    }

    #[test]
    fn distance_energy_by_explicit_summation() {
        // 4·5^m edges, increment 3^-m each: 3^m·4·5^m·3^{-2m} at p = 2
        for m in 1..=3u32 {
            let g = shared_graph(m).unwrap();
            let v: Vec<BigRational> = sample_on_graph(&DistanceToCenter, &g);
            let expected = q(4 * 5i64.pow(m), 3i64.pow(m));
            assert_eq!(discrete_energy(&g, &v, ex(2.0)).unwrap(), expected);
            assert_eq!(streaming_energy::<BigRational, _>(&DistanceToCenter, ex(2.0), m).unwrap(), expected);
            assert_eq!(energy_infty(&g, &v, None).unwrap(), q(1, 1));
        }
    }

    #[test]
    fn central_ball_restriction() {
        let cross = PaFunction::<BigRational>::cross();
        let ball = Region::parse("center:3^-1").unwrap();
        for m in 1..=2 {
            let g = shared_graph(m).unwrap();
            let v = sample_on_graph(&cross, &g);
            for p in [1.0, 2.0, 4.0] {
                assert_eq!(discrete_energy_restricted(&g, &v, &ball, ex(p)).unwrap(), q(4, 3));
            }
        }
        for n in 1..=3u32 {
            let ball = Region::Ball { center: LatticePoint::center(), radius: Ratio::new(1, 3i64.pow(n)) };
            let e = energy_limit(&cross, ex(2.0), &ball).unwrap();
            assert_eq!(e, q(4, 3i64.pow(n)));
            let g = gradient_norm(&cross.weak_gradient(), ex(2.0), &ball).unwrap();
            assert_eq!(g, e);
        }
    }

    #[test]
    fn restricted_to_whole_matches_unrestricted() {
        let cross = PaFunction::<f64>::cross().refine(2).unwrap();
        let a = discrete_energy(cross.graph(), cross.values(), ex(1.5)).unwrap();
        let b = discrete_energy_restricted(cross.graph(), cross.values(), &Region::Whole, ex(1.5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_norm_of_cross() {
        let grad = PaFunction::<BigRational>::cross().weak_gradient();
        for p in [1.0, 2.0, 5.0] {
            assert_eq!(gradient_norm(&grad, ex(p), &Region::Whole).unwrap(), q(4, 1));
        }
        assert_eq!(gradient_norm(&EdgeDensity::<f64>::zero(1).unwrap(), ex(2.0), &Region::Whole).unwrap(), 0.0);
        let cell = Region::Cell("5".parse().unwrap());
        assert_eq!(gradient_norm(&grad, ex(2.0), &cell).unwrap(), q(4, 3));
        assert_eq!(energy_limit(&PaFunction::<BigRational>::cross(), ex(2.0), &cell).unwrap(), q(4, 3));
    }

    #[test]
    fn partial_edges_in_balls() {
        // B(q5, 1/2) covers half of each level-0 arm
        let grad = PaFunction::<BigRational>::cross().weak_gradient();
        let ball = Region::Ball { center: LatticePoint::center(), radius: Ratio::new(1, 2) };
        assert_eq!(gradient_norm(&grad, ex(2.0), &ball).unwrap(), q(2, 1));
        assert!(matches!(energy_limit(&PaFunction::<f64>::cross(), ex(2.0), &ball), Err(Error::Resolution(_))));
        // a ball around q2 of radius 3/2 reaches half way down the opposite arm
        let ball = Region::Ball { center: LatticePoint::parse("q2").unwrap(), radius: Ratio::new(3, 2) };
        assert_eq!(gradient_norm(&grad, ex(1.0), &ball).unwrap(), q(5, 2));
    }

    #[test]
    fn streaming_matches_graph_energy() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let f = PaFunction::<f64>::random(2, &mut rng).unwrap();
        for m in 2..=4 {
            let g = shared_graph(m).unwrap();
            let v = sample_on_graph(&f, &g);
            let a = discrete_energy(&g, &v, ex(2.0)).unwrap();
            let b = streaming_energy(&f, ex(2.0), m).unwrap();
            assert!((a - b).abs() <= 1e-12 * a);
            assert_eq!(streaming_energy_infty(&f, m), energy_infty(&g, &v, None).unwrap());
        }
    }

    #[test]
    fn scans_and_verdicts() {
        let cross = PaFunction::<f64>::cross();
        let s = energy_sup_scan(&cross, ex(2.0), 0..=6, DEFAULT_DIVERGENCE_RATIO).unwrap();
        assert_eq!(s.verdict, Verdict::Bounded);
        assert!(s.monotone && s.energies.iter().all(|e| (e - 4.0).abs() < 1e-12));

        let s = energy_sup_scan::<f64, _>(&DistanceToCenter, ex(2.0), 0..=6, DEFAULT_DIVERGENCE_RATIO).unwrap();
        match s.verdict {
            Verdict::Diverging { rate, .. } => assert!((rate - 5.0 / 3.0).abs() < 1e-9),
            v => panic!("expected divergence, got {v:?}"),
        }

        let s = energy_sup_scan::<f64, _>(&CantorEdgeFunction, ex(1.0), 0..=10, DEFAULT_DIVERGENCE_RATIO).unwrap();
        assert_eq!(s.verdict, Verdict::Bounded);
        assert!(s.energies.iter().all(|e| (e - 1.0).abs() < 1e-12));
    }

    #[test]
    fn cantor_support_shrinks_by_two_thirds() {
        for m in 0..=8 {
            let (count, nu) = support_measure::<BigRational, _>(&CantorEdgeFunction, m);
            assert_eq!(count, 1u64 << m);
            let expected = num_traits::pow(q(2, 3), m as usize);
            assert_eq!(nu, expected);
        }
    }

    #[test]
    fn self_similarity_of_cross() {
        let s = self_similarity_check(&PaFunction::<BigRational>::cross(), ex(2.0), 0).unwrap();
        assert_eq!(s.lhs, q(4, 1));
        assert_eq!(s.pieces, [q(2, 9), q(2, 9), q(2, 9), q(2, 9), q(4, 9)]);
        assert_eq!(s.rhs, q(4, 1));
        let c = self_similarity_check(&Constant(0.5f64), ex(3.0), 2).unwrap();
        assert_eq!((c.lhs, c.rhs, c.gap), (0.0, 0.0, 0.0));
    }

    #[test]
    fn profile_and_csv() {
        let cross = PaFunction::<f64>::cross();
        let r = energy_profile(&cross, Some(ex(2.0)), &Region::Whole, 0..=3).unwrap();
        assert!(r.iter().all(|x| x.monotone_ok && (x.energy - 4.0).abs() < 1e-12));
        let mut buf = Vec::new();
        write_energy_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p,level,region,energy,monotone_ok\n2,0,whole,4,true"));
        let inf = energy_profile(&cross, None, &Region::Whole, [1]).unwrap();
        assert_eq!(serde_json::to_value(&inf[0]).unwrap()["p"], "inf");
    }

    #[test]
    fn rational_rejects_fractional_exponents() {
        let g = shared_graph(0).unwrap();
        let v = vec![q(0, 1); 5];
        assert!(matches!(discrete_energy(&g, &v, ex(1.5)), Err(Error::UnsupportedExponent(_))));
        assert!(matches!(discrete_energy(&g, &v[..4], ex(2.0)), Err(Error::Shape { .. })));
    }
}

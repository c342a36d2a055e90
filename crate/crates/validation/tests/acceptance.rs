//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use num_rational::{BigRational, Ratio};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vicsek::besov::{ks_energy, CellSamples};
use vicsek::energy::{
    discrete_energy, discrete_energy_restricted, energy_infty, energy_limit, gradient_norm,
    self_similarity_check, streaming_energy, support_measure, Region,
};
use vicsek::experiments::{
    central_radius, hajlasz_divergence, k_functional_scan, morrey_check, poincare_check,
    random_pairs, sharpness_fit,
};
use vicsek::function::cantor::CantorEdgeFunction;
use vicsek::function::integral::{mu_integral, quadrature};
use vicsek::function::sampler::DistanceToCenter;
use vicsek::geometry::graph::{shared_graph, CableGraph};
use vicsek::geometry::lattice::LatticePoint;
use vicsek::geometry::measure::{alpha_p, D_H};
use vicsek::geometry::metric;
use vicsek::{Exponent, PaFunction64, PaFunctionQ};

type Outcome = Result<String, String>;

fn ex(p: f64) -> Exponent {
    Exponent::new(p).expect("valid exponent")
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn structure() -> Outcome {
    for m in 0..=6u32 {
        let start = Instant::now();
        let g = CableGraph::build(m).map_err(err)?;
        let elapsed = start.elapsed();
        let (nv, ne) = (g.vertex_count() as u64, g.edge_count() as u64);
        if ne != 4 * 5u64.pow(m) || nv != ne + 1 {
            return Err(format!("m={m}: {nv} vertices, {ne} edges"));
        }
        // connected with |E| = |V| − 1 means acyclic
        let mut seen = vec![false; g.vertex_count()];
        let mut queue = VecDeque::from([g.root()]);
        seen[g.root()] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for (v, _) in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        if reached != g.vertex_count() {
            return Err(format!("m={m}: only {reached} of {nv} vertices reachable"));
        }
        if m == 6 && elapsed >= Duration::from_secs(5) {
            return Err(format!("m=6 build took {elapsed:?}"));
        }
        if m == 6 {
            return Ok(format!("m=0..6 counts and tree property hold; m=6 built in {elapsed:.2?}"));
        }
    }
    unreachable!()
}

fn path_counts() -> Outcome {
    let g = shared_graph(4).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let (u, v) = (rng.gen_range(0..g.vertex_count()), rng.gen_range(0..g.vertex_count()));
        let path = g.geodesic_path(u, v).map_err(err)?.len() as u64;
        let d = metric::distance(&g.point(u), &g.point(v)).map_err(err)?;
        // |γ_4| = 3^4·d exactly
        if metric::Length::new(path, 4) != metric::Length::new(d.steps * 3u64.pow(4 - d.level), 4) {
            return Err(format!("pair ({u}, {v}): {path} edges, d = {d}"));
        }
    }
    Ok("10^4 pairs at m=4".into())
}

fn cross_energy() -> Outcome {
    let exact = PaFunctionQ::cross();
    let float = PaFunction64::cross();
    let four = BigRational::from_integer(4.into());
    let mut worst: f64 = 0.0;
    for m in 0..=6 {
        let g = shared_graph(m).map_err(err)?;
        let vq = exact.restrict(m).map_err(err)?;
        let vf = float.restrict(m).map_err(err)?;
        for p in [1.0, 2.0, 3.0] {
            let e = discrete_energy(&g, &vq, ex(p)).map_err(err)?;
            if e != four {
                return Err(format!("rational E_{p}^{m} = {e}"));
            }
        }
        for p in [1.0, 1.5, 2.0, 3.0] {
            worst = worst.max(rel(discrete_energy(&g, &vf, ex(p)).map_err(err)?, 4.0));
        }
        if !energy_infty(&g, &vq, None).map_err(err)?.is_one() {
            return Err(format!("rational E_inf^{m} differs from 1"));
        }
        worst = worst.max(rel(energy_infty(&g, &vf, None).map_err(err)?, 1.0));
    }
    check(worst <= 1e-12, format!("rational exact; float max relative error {worst:.1e}"))
}

fn gradient_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let f = PaFunction64::random(i % 4, &mut rng).map_err(err)?;
        let grad = f.weak_gradient();
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            let a = energy_limit(&f, ex(p), &Region::Whole).map_err(err)?;
            let b = gradient_norm(&grad, ex(p), &Region::Whole).map_err(err)?;
            worst = worst.max(rel(a, b));
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-12 && elapsed < Duration::from_secs(10),
        format!("max relative gap {worst:.1e} in {elapsed:.2?}"),
    )
}

/// Values of a PA function at the vertices of `V_m`, for any `m`.
fn values_on(f: &PaFunctionQ, g: &CableGraph) -> Vec<BigRational> {
    if g.level() >= f.level() {
        f.restrict(g.level()).expect("finer level")
    } else {
        g.points().map(|x| f.evaluate_point(&x).expect("point of K")).collect()
    }
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let centers = shared_graph(3).map_err(err)?;
    let graphs: Vec<_> = (0..=6).map(shared_graph).collect::<Result<_, _>>().map_err(err)?;
    // each ball as explicit vertex sets, one per level
    let mut balls = Vec::new();
    for _ in 0..20 {
        let c = centers.point(rng.gen_range(0..centers.vertex_count()));
        let ball = Region::ball(c, central_radius(rng.gen_range(0..=3))).map_err(err)?;
        let mut per_level = Vec::new();
        for g in &graphs {
            let inside = ball.members(g).map_err(err)?;
            let ids = (0..g.vertex_count()).filter(|&i| inside[i]).collect();
            per_level.push(Region::Vertices { level: g.level(), ids });
        }
        balls.push((ball, per_level));
    }
    let mut checks = 0;
    for i in 0..50 {
        let f = PaFunctionQ::random(i % 4, &mut rng).map_err(err)?;
        let values: Vec<Vec<BigRational>> = graphs.iter().map(|g| values_on(&f, g)).collect();
        for (ball, regions) in &balls {
            for p in [1.0, 2.0, 3.0] {
                let energies: Vec<BigRational> = graphs
                    .iter()
                    .zip(&values)
                    .zip(regions)
                    .map(|((g, v), region)| discrete_energy_restricted(g, v, region, ex(p)))
                    .collect::<Result<_, _>>()
                    .map_err(err)?;
                for m in 0..=5 {
                    checks += 1;
                    if energies[m] > energies[m + 1] {
                        return Err(format!("ball {ball}, p={p}: E^{m} = {} > E^{} = {}", energies[m], m + 1, energies[m + 1]));
                    }
                }
            }
        }
    }
    Ok(format!("{checks} exact comparisons, zero violations"))
}

fn self_similarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let f = PaFunction64::random(i % 4, &mut rng).map_err(err)?;
        for p in [1.0, 2.0, 3.0] {
            for m in 0..=4 {
                worst = worst.max(self_similarity_check(&f, ex(p), m).map_err(err)?.gap);
            }
        }
    }
    check(worst <= 1e-12, format!("max relative gap {worst:.1e}"))
}

fn exact_integral() -> Outcome {
    let cross = PaFunction64::cross();
    let target = 8.0 / 21.0;
    let exact = mu_integral(&cross, ex(2.0));
    let quad = quadrature(&cross, ex(2.0), 8, 0.0);
    let ks = ks_energy(&CellSamples::from_sampler(&cross, 6), &Ratio::from_integer(2), ex(2.0)).map_err(err)?;
    check(
        (exact - target).abs() <= 1e-10 && (quad.value - target).abs() <= quad.bound && ks.contains(16.0 / 21.0),
        format!(
            "exact {exact:.15}; quadrature {:.6} ± {:.2e}; KS [{:.6}, {:.6}]",
            quad.value,
            quad.bound,
            ks.lo(),
            ks.hi()
        ),
    )
}

fn poincare_sharpness() -> Outcome {
    let start = Instant::now();
    let cross = PaFunction64::cross();
    let mut worst: f64 = 0.0;
    for n in 1..=5 {
        let r = poincare_check(&cross, &LatticePoint::center(), &central_radius(n), ex(2.0), 1).map_err(err)?;
        worst = worst.max((r.ratio - 2.0 / 21.0).abs());
    }
    let fit = sharpness_fit(ex(2.0), 1..=5).map_err(err)?;
    let elapsed = start.elapsed();
    let gap = (fit.exponent - (2.0 + D_H)).abs();
    check(
        worst <= 1e-9 && gap <= 1e-6 && fit.residual <= 1e-6 && elapsed < Duration::from_secs(30),
        format!("ratio error {worst:.1e}; exponent {:.10} (gap {gap:.1e}, residual {:.1e}) in {elapsed:.2?}", fit.exponent, fit.residual),
    )
}

fn morrey() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let f = PaFunction64::random(i % 4, &mut rng).map_err(err)?;
        let pairs = random_pairs(4, &Region::Whole, 1000, &mut rng).map_err(err)?;
        let p = [1.0, 1.5, 2.0, 3.0][i as usize % 4];
        worst = worst.max(morrey_check(&f, &Region::Whole, ex(p), &pairs).map_err(err)?.max_ratio);
    }
    check(worst <= 1.0 + 1e-12, format!("max ratio {worst:.12}"))
}

fn cantor() -> Outcome {
    let one = BigRational::one();
    for m in 0..=10 {
        let e: BigRational = streaming_energy(&CantorEdgeFunction, ex(1.0), m).map_err(err)?;
        if e != one {
            return Err(format!("E_1^{m} = {e}"));
        }
    }
    let two_thirds = BigRational::new(2.into(), 3.into());
    let supports: Vec<BigRational> = (0..=10).map(|m| support_measure::<BigRational, _>(&CantorEdgeFunction, m).1).collect();
    for (m, w) in supports.windows(2).enumerate() {
        if &w[1] / &w[0] != two_thirds {
            return Err(format!("support ratio {} at m={m}", &w[1] / &w[0]));
        }
    }
    Ok(format!("E_1 = 1 for m=0..10; support measure (2/3)^m down to {}", supports[10]))
}

fn hajlasz() -> Outcome {
    let levels = hajlasz_divergence(&PaFunction64::cross(), ex(2.0), 3..=7).map_err(err)?;
    let strong: Vec<f64> = levels.iter().map(|l| l.strong).collect();
    let weak: Vec<f64> = levels.iter().map(|l| l.weak).collect();
    let inc: Vec<f64> = strong.windows(2).map(|w| w[1] - w[0]).collect();
    let increasing = inc.iter().all(|d| *d > 0.0);
    let steady = inc.windows(2).all(|w| w[1] >= 0.4 * w[0]);
    let band = weak.iter().copied().fold(0.0, f64::max) / weak.iter().copied().fold(f64::INFINITY, f64::min);
    check(
        increasing && steady && band <= 4.0,
        format!("strong {strong:.4?}; weak max/min {band:.3}"),
    )
}

fn k_functional() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p = ex(2.0);
    let grid: Vec<_> = (0..=4).map(|k| Ratio::new(2, 3i64.pow(k))).collect();
    let mut fs = vec![PaFunction64::cross()];
    for n in [1, 2] {
        fs.push(PaFunction64::random(n, &mut rng).map_err(err)?);
    }
    let mut bands = Vec::new();
    let mut cross_top = 0.0;
    for (i, f) in fs.iter().enumerate() {
        let report = k_functional_scan(f, p, alpha_p(p), &grid, 5).map_err(err)?;
        if i == 0 {
            cross_top = report.points[0].k_up;
        }
        bands.push(report.band);
    }
    let ok = bands.iter().all(|b| *b <= 400.0) && cross_top <= (8.0f64 / 21.0).sqrt() + 1e-9;
    check(ok, format!("bands {bands:.3?}; cross K_up(2) = {cross_top:.12}"))
}

fn performance() -> Outcome {
    let run = |threads: usize| -> Result<(f64, Duration), String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(err)?;
        let start = Instant::now();
        let e: f64 = pool.install(|| streaming_energy(&DistanceToCenter, ex(2.0), 10)).map_err(err)?;
        Ok((e, start.elapsed()))
    };
    let (e1, t1) = run(1)?;
    let (e4, t4) = run(4)?;
    let speedup = t1.as_secs_f64() / t4.as_secs_f64();
    let identical = e1.to_bits() == e4.to_bits();
    check(
        t4 < Duration::from_secs(60) && speedup >= 2.0 && identical,
        format!(
            "E_2^10 = {e4}; 1 worker {t1:.2?}, 4 workers {t4:.2?}, speedup {speedup:.2}, identical {identical}; {} CPU(s) available",
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 13] = [
        ("graph structure", structure),
        ("path-count identity", path_counts),
        ("cross energy", cross_energy),
        ("gradient identity", gradient_identity),
        ("monotonicity on balls", monotonicity),
        ("self-similarity", self_similarity),
        ("exact integral", exact_integral),
        ("Poincare sharpness", poincare_sharpness),
        ("Morrey estimate", morrey),
        ("Cantor staircase", cantor),
        ("Hajlasz divergence", hajlasz),
        ("K-functional band", k_functional),
        ("streaming performance", performance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{t:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{t:.2?}]", i + 1)
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

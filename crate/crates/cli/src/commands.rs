//! One function per subcommand; each returns reports and optional CSV.

use std::fs::File;
use std::io::BufWriter;

use num_rational::{BigRational, Ratio};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use vicsek::besov::{besov_seminorm, bv_functional, write_ks_csv, CellSamples, KsReport};
use vicsek::energy::{
    discrete_energy_restricted, energy_infty, energy_limit, energy_profile, energy_sup_scan, gradient_norm,
    self_similarity_check, streaming_energy, streaming_energy_infty, write_energy_csv, Region,
};
use vicsek::experiments::{
    default_maximal_grid, hajlasz_divergence, k_functional_scan, maximal_function, morrey_check, morrey_ratio, poincare_check,
    random_pairs, sharpness_fit,
};
use vicsek::function::cantor::CantorEdgeFunction;
use vicsek::function::sampler::{sample_on_graph, CrossSampler, DistanceToCenter};
use vicsek::geometry::cache::{read_graph, write_graph};
use vicsek::geometry::graph::{estimated_bytes, max_level, shared_graph, CableGraph};
use vicsek::geometry::measure::D_H;
use vicsek::geometry::metric::Radius;
use vicsek::{Exponent, Scalar};

use crate::input::{ExactFunc, Func, PSpec};
use crate::report::{csv_table, Assertion, CliError, Outcome, Report};
use crate::{Command, RunConfig};

type Res<T> = Result<T, CliError>;

/// Runs `$body` with `$s` bound to the function as a sampler.
macro_rules! with_sampler {
    ($f:expr, |$s:ident| $body:expr) => {
        match $f {
            Func::Pa(pa) => {
                let $s = pa;
                $body
            }
            Func::Dist => {
                let $s = &DistanceToCenter;
                $body
            }
            Func::Cantor => {
                let $s = &CantorEdgeFunction;
                $body
            }
            Func::Cells(_) => return Err(CliError::Usage("cell data cannot be refined to other levels".into())),
        }
    };
}

/// Same for the exact representations.
macro_rules! with_exact_sampler {
    ($f:expr, |$s:ident| $body:expr) => {
        match $f {
            ExactFunc::Pa(pa) => {
                let $s = pa;
                $body
            }
            ExactFunc::Dist => {
                let $s = &DistanceToCenter;
                $body
            }
            ExactFunc::Cantor => {
                let $s = &CantorEdgeFunction;
                $body
            }
        }
    };
}

pub fn run(command: Command, cfg: &RunConfig) -> Res<Outcome> {
    match command {
        Command::Build => build(cfg),
        Command::Energy => energy(cfg),
        Command::Gradient => gradient(cfg),
        Command::Ks => ks(cfg, "ks"),
        Command::Besov => ks(cfg, "besov"),
        Command::Bv => ks(cfg, "bv"),
        Command::Morrey => morrey(cfg),
        Command::Poincare => poincare(cfg),
        Command::Sharpness => sharpness(cfg),
        Command::Maximal => maximal(cfg),
        Command::Hajlasz => hajlasz(cfg),
        Command::Kfunc => kfunc(cfg),
        Command::Selfsim => selfsim(cfg),
        Command::All => all(cfg),
    }
}

fn check_level(m: u32) -> Res<u32> {
    let cap = max_level();
    if m > cap {
        return Err(CliError::Resource(format!("level {m} exceeds the level cap {cap} (VICSEK_MAX_LEVEL)")));
    }
    Ok(m)
}

fn level_graph(m: u32) -> Res<std::sync::Arc<CableGraph>> {
    Ok(shared_graph(check_level(m)?)?)
}

fn p_or_default(cfg: &RunConfig) -> PSpec {
    cfg.p.unwrap_or(PSpec::Finite(Exponent::new(2.0).expect("2 is a valid exponent")))
}

fn finite_p(cfg: &RunConfig) -> Res<Exponent> {
    p_or_default(cfg).finite()
}

fn p_value(p: PSpec) -> serde_json::Value {
    match p {
        PSpec::Finite(p) => json!(p.get()),
        PSpec::Inf => json!("inf"),
    }
}

fn region(cfg: &RunConfig) -> Region {
    cfg.region.clone().unwrap_or(Region::Whole)
}

fn base(name: &str, cfg: &RunConfig, values: impl serde::Serialize) -> Res<Report> {
    Report::new(name, values)?.param("function", cfg.function_label())
}

fn f64s(xs: &[f64]) -> Vec<String> {
    xs.iter().map(|x| format!("{x:?}")).collect()
}

fn build(cfg: &RunConfig) -> Res<Outcome> {
    let m = check_level(cfg.level.unwrap_or(6))?;
    let (g, source) = match &cfg.cache {
        Some(path) if path.exists() => {
            let g = read_graph(std::io::BufReader::new(File::open(path)?))?;
            if g.level() != m {
                return Err(CliError::Usage(format!("cache {} holds level {}, not {m}", path.display(), g.level())));
            }
            (g, "cache")
        }
        _ => (CableGraph::build(m)?, "built"),
    };
    if let (Some(path), "built") = (&cfg.cache, source) {
        write_graph(&g, BufWriter::new(File::create(path)?))?;
    }
    let (nv, ne) = (g.vertex_count() as u64, g.edge_count() as u64);
    let report = Report::new(
        "build",
        json!({"level": m, "vertices": nv, "edges": ne, "cells": g.cell_count(), "estimated_bytes": estimated_bytes(m), "source": source}),
    )?
    .param("level", m)?
    .assert(Assertion::holds("edges = 4*5^m", ne == 4 * 5u64.pow(m), true))
    .assert(Assertion::holds("vertices = edges + 1", nv == ne + 1, true));
    let rows = [vec![m.to_string(), nv.to_string(), ne.to_string(), g.cell_count().to_string()]];
    Ok(Outcome::json(report).with_csv(csv_table(&["level", "vertices", "edges", "cells"], rows)?))
}

/// `E_{A,p}^m` for a sampler, streamed on the whole set.
fn sampler_energy<T: Scalar, S: CrossSampler<T>>(f: &S, p: PSpec, region: &Region, m: u32) -> Res<T> {
    if *region == Region::Whole {
        return Ok(match p {
            PSpec::Finite(p) => streaming_energy(f, p, m)?,
            PSpec::Inf => streaming_energy_infty(f, m),
        });
    }
    let g = level_graph(m)?;
    let values = sample_on_graph(f, &g);
    Ok(match p {
        PSpec::Finite(p) => discrete_energy_restricted(&g, &values, region, p)?,
        PSpec::Inf => energy_infty(&g, &values, Some(region))?,
    })
}

fn energy(cfg: &RunConfig) -> Res<Outcome> {
    let p = p_or_default(cfg);
    let region = region(cfg);
    let mut m = check_level(cfg.level.unwrap_or(6))?;
    let tol = cfg.tol.unwrap_or(1e-12);
    let f = cfg.function.load()?;

    let (value, previous, text, exact, monotone) = if cfg.exact {
        let fq = cfg.function.load_exact()?;
        let (e, prev): (BigRational, Option<BigRational>) = with_exact_sampler!(&fq, |s| {
            let e = sampler_energy(s, p, &region, m)?;
            let prev = if m > 0 { Some(sampler_energy(s, p, &region, m - 1)?) } else { None };
            (e, prev)
        });
        let monotone = prev.as_ref().map(|q| Assertion::holds("E^(m-1) <= E^m", *q <= e, true));
        (e.to_f64_lossy(), prev.map(|q| q.to_f64_lossy()), e.to_string(), Some(e.to_string()), monotone)
    } else if let Func::Cells(c) = &f {
        m = c.level();
        let g = level_graph(m)?;
        let values = c.vertex_surrogate(&g)?;
        let e = match p {
            PSpec::Finite(p) => discrete_energy_restricted(&g, &values, &region, p)?,
            PSpec::Inf => energy_infty(&g, &values, Some(&region))?,
        };
        (e, None, format!("{e:?}"), None, None)
    } else {
        let (e, prev): (f64, Option<f64>) = with_sampler!(&f, |s| {
            let e = sampler_energy(s, p, &region, m)?;
            let prev = if m > 0 { Some(sampler_energy(s, p, &region, m - 1)?) } else { None };
            (e, prev)
        });
        let monotone = prev.map(|q| Assertion::at_most("E^(m-1) <= E^m", q - e, tol * e.abs(), true));
        (e, prev, format!("{e:?}"), None, monotone)
    };

    let mut report = base("energy", cfg, json!({"energy": value, "exact": exact, "previous_level": previous}))?
        .param("p", p_value(p))?
        .param("level", m)?
        .param("region", region.to_string())?;
    if let Some(a) = monotone {
        report = report.assert(a);
    }
    if cfg.scan {
        let scan = with_sampler!(&f, |s| energy_sup_scan::<f64, _>(s, p.finite()?, 0..=m, cfg.divergence_ratio)?);
        report.values["scan"] = serde_json::to_value(&scan)?;
        report = report.assert(Assertion::holds("scan monotone", scan.monotone, true));
    }
    let mut outcome = Outcome::json(report).with_text(text);
    if cfg.csv.is_some() {
        let rows = match &f {
            Func::Cells(_) => vec![vicsek::energy::EnergyReport {
                p: p.as_f64(),
                level: m,
                region: region.to_string(),
                energy: value,
                monotone_ok: true,
            }],
            _ => {
                let pe = match p {
                    PSpec::Finite(p) => Some(p),
                    PSpec::Inf => None,
                };
                with_sampler!(&f, |s| energy_profile::<f64, _>(s, pe, &region, 0..=m)?)
            }
        };
        let mut buf = Vec::new();
        write_energy_csv(&rows, &mut buf)?;
        outcome = outcome.with_csv(buf);
    }
    Ok(outcome)
}

fn gradient(cfg: &RunConfig) -> Res<Outcome> {
    let p = finite_p(cfg)?;
    let region = region(cfg);
    let f = cfg.function.load()?;
    let f = f.pa()?;
    let density = f.weak_gradient();
    let norm = gradient_norm(&density, p, &region)?;
    let limit = match energy_limit(f, p, &region) {
        Ok(e) => Some(e),
        Err(vicsek::Error::Resolution(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut report = base("gradient", cfg, json!({"gradient_norm": norm, "energy_limit": limit}))?
        .param("p", p.get())?
        .param("region", region.to_string())?;
    if let Some(e) = limit {
        let gap = (e - norm).abs();
        report = report.assert(Assertion::at_most(
            "energy_limit = gradient_norm",
            gap,
            cfg.tol.unwrap_or(1e-12) * e.abs().max(norm.abs()),
            true,
        ));
    }
    let g = f.graph();
    let rows = (0..g.edge_count()).map(|e| {
        let (lo, hi) = g.edge_endpoints(e);
        vec![e.to_string(), g.point(lo).to_string(), g.point(hi).to_string(), format!("{:?}", density.values()[e])]
    });
    Ok(Outcome::json(report).with_csv(csv_table(&["edge", "from", "to", "density"], rows)?))
}

fn ks_samples(f: &Func, m: u32) -> Res<CellSamples<f64>> {
    Ok(match f {
        Func::Cells(c) => CellSamples::from_cells(c),
        other => with_sampler!(other, |s| CellSamples::from_sampler(s, m)),
    })
}

fn two_thirds_grid(kmax: u32) -> Vec<Radius> {
    (0..=kmax).map(|k| Ratio::new(2, 3i64.pow(k))).collect()
}

fn ks(cfg: &RunConfig, name: &str) -> Res<Outcome> {
    let f = cfg.function.load()?;
    let m = check_level(cfg.level.unwrap_or(5))?;
    let samples = ks_samples(&f, m)?;
    let grid = two_thirds_grid(cfg.rmin_exp.unwrap_or(samples.level().saturating_sub(2)));
    let report: KsReport = if name == "bv" {
        bv_functional(&samples, &grid)?
    } else {
        let p = finite_p(cfg)?;
        besov_seminorm(&samples, cfg.alpha.resolve(p), p, &grid)?
    };
    let ordered = report.points.iter().all(|pt| pt.energy.lo() <= pt.energy.value && pt.energy.value <= pt.energy.hi());
    let values = if name == "ks" { serde_json::to_value(&report.points)? } else { serde_json::to_value(&report)? };
    let out = base(name, cfg, values)?
        .param("p", report.p)?
        .param("alpha", report.alpha)?
        .param("level", samples.level())?
        .bound("seminorm", [report.seminorm_lo, report.seminorm_hi])?
        .assert(Assertion::holds("error bars bracket every estimate", ordered, true));
    let mut buf = Vec::new();
    write_ks_csv(&report, &mut buf)?;
    Ok(Outcome::json(out).with_csv(buf))
}

fn morrey(cfg: &RunConfig) -> Res<Outcome> {
    let p = finite_p(cfg)?;
    let region = region(cfg);
    let f = cfg.function.load()?;
    let f = f.pa()?;
    let m = check_level(cfg.level.unwrap_or(4))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs = random_pairs(m, &region, cfg.pairs, &mut rng)?;
    let r = morrey_check(f, &region, p, &pairs)?;
    let max = r.max_ratio;
    let rows = pairs
        .iter()
        .map(|(x, y)| {
            let q = morrey_ratio(f, x, y, p, r.energy)?;
            Ok(vec![x.to_string(), y.to_string(), format!("{q:?}")])
        })
        .collect::<Res<Vec<_>>>()?;
    let report = base("morrey", cfg, r)?
        .param("p", p.get())?
        .param("level", m)?
        .param("seed", cfg.seed)?
        .param("pairs", cfg.pairs)?
        .assert(Assertion::at_most("max ratio <= 1", max, 1.0 + cfg.tol.unwrap_or(1e-12), true));
    Ok(Outcome::json(report).with_csv(csv_table(&["x", "y", "ratio"], rows)?))
}

fn poincare(cfg: &RunConfig) -> Res<Outcome> {
    let p = finite_p(cfg)?;
    let ball = region(cfg);
    let (center, radius) = match ball.clone() {
        Region::Ball { center, radius } => (center, radius),
        other => return Err(CliError::Usage(format!("poincare needs a ball, got {other}"))),
    };
    let f = cfg.function.load()?;
    let extra = cfg.level.unwrap_or(1);
    let r = poincare_check(f.pa()?, &center, &radius, p, extra)?;
    let (ratio, err) = (r.mean_form_ratio, r.mean_form_ratio_err);
    let report = base("poincare", cfg, &r)?
        .param("p", p.get())?
        .param("ball", ball.to_string())?
        .param("extra_levels", extra)?
        .bound("ratio", [r.ratio - r.ratio_err, r.ratio + r.ratio_err])?
        .assert(Assertion::at_most("mean-form ratio <= 1", ratio - err, 1.0 + cfg.tol.unwrap_or(1e-12), true));
    Ok(Outcome::json(report))
}

fn sharpness(cfg: &RunConfig) -> Res<Outcome> {
    let p = finite_p(cfg)?;
    let n = cfg.level.unwrap_or(5);
    let fit = sharpness_fit(p, 1..=n)?;
    let expected = p.get() + D_H;
    let rows: Vec<Vec<String>> = fit.points.iter().map(|(r, v)| f64s(&[*r, *v])).collect();
    let report = Report::new("sharpness", &fit)?
        .param("function", "cross")?
        .param("p", p.get())?
        .param("levels", format!("1..={n}"))?
        .bound("expected_exponent", expected)?
        .assert(Assertion::at_most("exponent = p + d_h", (fit.exponent - expected).abs(), cfg.tol.unwrap_or(1e-6), true))
        .assert(Assertion::at_most("fit residual", fit.residual, cfg.tol.unwrap_or(1e-6), true));
    Ok(Outcome::json(report).with_csv(csv_table(&["r", "integral"], rows)?))
}

fn maximal(cfg: &RunConfig) -> Res<Outcome> {
    let p = finite_p(cfg)?;
    let m = check_level(cfg.level.unwrap_or(4))?;
    let f = cfg.function.load()?;
    let r = maximal_function(f.pa()?, m, p, &default_maximal_grid(m), cfg.pairs, cfg.seed)?;
    let ok = r.chebyshev_ok();
    let g = level_graph(m)?;
    let rows: Vec<Vec<String>> = g
        .anchors()
        .into_iter()
        .zip(&r.values)
        .enumerate()
        .map(|(c, (a, v))| vec![c.to_string(), g.point(a).to_string(), format!("{v:?}")])
        .collect();
    let report = base("maximal", cfg, &r)?
        .param("p", p.get())?
        .param("level", m)?
        .param("seed", cfg.seed)?
        .assert(Assertion::holds("weak <= strong", ok, true));
    Ok(Outcome::json(report).with_csv(csv_table(&["cell", "anchor", "g"], rows)?))
}

fn hajlasz(cfg: &RunConfig) -> Res<Outcome> {
    let p = finite_p(cfg)?;
    let top = check_level(cfg.level.unwrap_or(7))?;
    let first = if top >= 5 { 3 } else { 1 };
    let f = cfg.function.load()?;
    let levels = hajlasz_divergence(f.pa()?, p, first..=top)?;
    let strong: Vec<f64> = levels.iter().map(|l| l.strong).collect();
    let weak: Vec<f64> = levels.iter().map(|l| l.weak).collect();
    let inc: Vec<f64> = strong.windows(2).map(|w| w[1] - w[0]).collect();
    let band = weak.iter().copied().fold(0.0, f64::max) / weak.iter().copied().fold(f64::INFINITY, f64::min);
    let rows: Vec<Vec<String>> =
        levels.iter().map(|l| vec![l.level.to_string(), format!("{:?}", l.strong), format!("{:?}", l.weak)]).collect();
    let report = base("hajlasz", cfg, &levels)?
        .param("p", p.get())?
        .param("levels", format!("{first}..={top}"))?
        .assert(Assertion::holds("weak <= strong at every level", levels.iter().all(|l| l.weak <= l.strong * (1.0 + 1e-12)), true))
        .assert(Assertion::holds("strong norm increasing", inc.iter().all(|d| *d > 0.0), false))
        .assert(Assertion::holds("increments at least 0.4x the previous", inc.windows(2).all(|w| w[1] >= 0.4 * w[0]), false))
        .assert(Assertion::at_most("weak max/min", if band.is_finite() { band } else { 1.0 }, 4.0, false));
    Ok(Outcome::json(report).with_csv(csv_table(&["level", "strong", "weak"], rows)?))
}

fn kfunc(cfg: &RunConfig) -> Res<Outcome> {
    let p = finite_p(cfg)?;
    let kmax = cfg.rmin_exp.unwrap_or(4);
    let m = check_level(cfg.level.unwrap_or(kmax + 1))?;
    let f = cfg.function.load()?;
    let r = k_functional_scan(f.pa()?, p, cfg.alpha.resolve(p), &two_thirds_grid(kmax), m)?;
    let rows: Vec<Vec<String>> = r
        .points
        .iter()
        .map(|q| {
            let mut row = f64s(&[q.r, q.ks, q.ks_lo, q.ks_hi, q.k_up, q.ratio]);
            row.push(q.chosen_n.map_or(String::new(), |n| n.to_string()));
            row.extend(f64s(&[q.remainder, q.smooth]));
            row
        })
        .collect();
    let band = r.band;
    let nonneg = r.points.iter().all(|q| q.k_up >= 0.0);
    let report = base("kfunc", cfg, &r)?
        .param("p", p.get())?
        .param("level", m)?
        .assert(Assertion::holds("K_up >= 0", nonneg, true))
        .assert(Assertion::at_most("ratio band", band, 400.0, false));
    let header = ["r", "ks", "ks_lo", "ks_hi", "k_up", "ratio", "chosen_n", "remainder", "smooth"];
    Ok(Outcome::json(report).with_csv(csv_table(&header, rows)?))
}

fn selfsim(cfg: &RunConfig) -> Res<Outcome> {
    let p = finite_p(cfg)?;
    let m = check_level(cfg.level.unwrap_or(3))?;
    let piece_rows = |pieces: Vec<String>| {
        csv_table(&["piece", "energy"], pieces.into_iter().enumerate().map(|(i, e)| vec![i.to_string(), e]))
    };
    let (report, csv) = if cfg.exact {
        let fq = cfg.function.load_exact()?;
        let s = with_exact_sampler!(&fq, |f| self_similarity_check::<BigRational, _>(f, p, m)?);
        let equal = s.lhs == s.rhs;
        let pieces: Vec<String> = s.pieces.iter().map(|x| x.to_string()).collect();
        let report = base("selfsim", cfg, json!({"lhs": s.lhs.to_string(), "rhs": s.rhs.to_string(), "pieces": pieces, "gap": s.gap}))?
            .assert(Assertion::holds("lhs = rhs exactly", equal, true));
        (report, piece_rows(pieces)?)
    } else {
        let f = cfg.function.load()?;
        let s = with_sampler!(&f, |x| self_similarity_check::<f64, _>(x, p, m)?);
        let gap = s.gap;
        let report = base("selfsim", cfg, &s)?.assert(Assertion::at_most("relative gap", gap, cfg.tol.unwrap_or(1e-12), true));
        (report, piece_rows(f64s(&s.pieces))?)
    };
    Ok(Outcome::json(report.param("p", p.get())?.param("level", m)?).with_csv(csv))
}

/// The standard experiment suite, run in parallel and merged in a fixed
/// order.
fn all(cfg: &RunConfig) -> Res<Outcome> {
    use crate::input::FunctionSpec as F;
    let with = |function: F, level: Option<u32>, region: Option<&str>| {
        let mut c = RunConfig { function, level, ..cfg.base_for_suite() };
        c.region = region.map(|r| Region::parse(r).expect("fixed region"));
        c
    };
    let suite: Vec<(Command, RunConfig)> = vec![
        (Command::Build, with(F::Cross, Some(6), None)),
        (Command::Energy, with(F::Cross, Some(6), None)),
        (Command::Energy, with(F::Dist, Some(6), None)),
        (Command::Gradient, with(F::Random { seed: cfg.seed, level: 3 }, None, None)),
        (Command::Ks, with(F::Cross, Some(5), None)),
        (Command::Besov, with(F::Dist, Some(5), None)),
        (Command::Bv, with(F::Cantor, Some(5), None)),
        (Command::Morrey, with(F::Random { seed: cfg.seed, level: 3 }, Some(4), None)),
        (Command::Poincare, with(F::Cross, None, Some("center:3^-3"))),
        (Command::Sharpness, with(F::Cross, Some(5), None)),
        (Command::Maximal, with(F::Cross, Some(4), None)),
        (Command::Hajlasz, with(F::Cross, Some(7), None)),
        (Command::Kfunc, with(F::Cross, Some(5), None)),
        (Command::Selfsim, with(F::Random { seed: cfg.seed, level: 2 }, Some(3), None)),
    ];
    let outcomes: Vec<Res<Outcome>> = suite.into_par_iter().map(|(cmd, c)| run(cmd, &c)).collect();
    let mut reports = Vec::new();
    for o in outcomes {
        reports.extend(o?.reports);
    }
    Ok(Outcome { reports, text: None, csv: None })
}

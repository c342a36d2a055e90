//! The Morrey estimate `|f(x) − f(y)|^p ≤ d(x, y)^{p−1}·E_{A,p}(f)` on a
//! convex set `A`.

use rand::Rng;
use serde::Serialize;

use crate::energy::{energy_limit, Region};
use crate::error::{Error, Result};
use crate::function::pa::PaFunction;
use crate::geometry::graph::shared_graph;
use crate::geometry::lattice::LatticePoint;
use crate::geometry::metric;
use crate::scalar::{Exponent, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorreyReport {
    pub p: f64,
    pub region: String,
    pub energy: f64,
    pub pairs: usize,
    /// `max |f(x) − f(y)|^p / (d(x, y)^{p−1}·E_{A,p}(f))`; the estimate says
    /// this is at most 1.
    pub max_ratio: f64,
    pub worst: Option<(String, String)>,
}

/// The Morrey ratio of one pair, given `E_{A,p}(f)`.
pub fn morrey_ratio<T: Scalar>(f: &PaFunction<T>, x: &LatticePoint, y: &LatticePoint, p: Exponent, energy: f64) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    let diff = (f.evaluate_point(x)? - f.evaluate_point(y)?).abs_pow(p).to_f64_lossy();
    if diff == 0.0 {
        return Ok(0.0);
    }
    let d = metric::distance(x, y)?.to_f64();
    Ok(diff / (d.powf(p.get() - 1.0) * energy))
}

fn contains(region: &Region, x: &LatticePoint) -> Result<bool> {
    Ok(match region {
        Region::Whole => true,
        Region::Cell(w) => w.map().square_contains(x),
        Region::Ball { center, radius } => metric::distance(center, x)?.cmp_radius(radius).is_le(),
        Region::Vertices { .. } => {
            return Err(Error::Region("Morrey pairs need a ball, a cell or the whole set".into()))
        }
    })
}

/// Maximum Morrey ratio over the given pairs, all of which must lie in the
/// region.
pub fn morrey_check<T: Scalar>(
    f: &PaFunction<T>,
    region: &Region,
    p: Exponent,
    pairs: &[(LatticePoint, LatticePoint)],
) -> Result<MorreyReport> {
    let energy = energy_limit(f, p, region)?.to_f64_lossy();
    let mut max_ratio = 0.0;
    let mut worst = None;
    for (x, y) in pairs {
        if !contains(region, x)? || !contains(region, y)? {
            return Err(Error::Domain(format!("pair ({x}, {y}) leaves the region {region}")));
        }
        let r = morrey_ratio(f, x, y, p, energy)?;
        if r > max_ratio {
            max_ratio = r;
            worst = Some((x.to_string(), y.to_string()));
        }
    }
    Ok(MorreyReport { p: p.get(), region: region.to_string(), energy, pairs: pairs.len(), max_ratio, worst })
}

/// Uniformly random pairs of level-`m` vertices inside the region.
pub fn random_pairs<R: Rng + ?Sized>(
    m: u32,
    region: &Region,
    count: usize,
    rng: &mut R,
) -> Result<Vec<(LatticePoint, LatticePoint)>> {
    let g = shared_graph(m)?;
    let flags = region.members(&g)?;
    let inside: Vec<usize> = (0..g.vertex_count()).filter(|&v| flags[v]).collect();
    if inside.is_empty() {
        return Err(Error::Region(format!("region {region} contains no level-{m} vertex")));
    }
    Ok((0..count)
        .map(|_| {
            let a = inside[rng.gen_range(0..inside.len())];
            let b = inside[rng.gen_range(0..inside.len())];
            (g.point(a), g.point(b))
        })
        .collect())
}

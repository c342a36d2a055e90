//! Geodesically convex regions and their vertex sets.

use std::collections::VecDeque;
use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::geometry::address::Address;
use crate::geometry::graph::{CableGraph, VertexId};
use crate::geometry::lattice::LatticePoint;
use crate::geometry::metric::{self, triadic_level, Length, Radius};

/// A convex subset of `K` on which restricted energies are taken.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Whole,
    /// Closed geodesic ball.
    Ball { center: LatticePoint, radius: Radius },
    Cell(Address),
    /// An explicit vertex set of `V_level`; must induce a subtree.
    Vertices { level: u32, ids: Vec<VertexId> },
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Whole => write!(f, "whole"),
            Region::Ball { center, radius } => write!(f, "ball({center};{radius})"),
            Region::Cell(w) => write!(f, "cell({w})"),
            Region::Vertices { level, ids } => write!(f, "vertices(level={level};n={})", ids.len()),
        }
    }
}

impl Region {
    pub fn ball(center: LatticePoint, radius: Radius) -> Result<Self> {
        if radius <= Ratio::from_integer(0) {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        if !metric::on_fractal(&center) {
            return Err(Error::Domain(format!("{center:?} is not a point of the fractal")));
        }
        Ok(Region::Ball { center, radius })
    }

    /// Parses `whole`, `cell:<digits>`, or `<point>:<radius>` where the point
    /// is `center`, `q1`..`q5` or `a/b/m` and the radius is e.g. `3^-2`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "whole" || s.is_empty() {
            return Ok(Region::Whole);
        }
        if let Some(w) = s.strip_prefix("cell:") {
            return Ok(Region::Cell(w.parse()?));
        }
        let (p, r) = s
            .split_once(':')
            .ok_or_else(|| Error::Format(format!("cannot parse region {s:?}")))?;
        let center = LatticePoint::parse(&p.replace('/', ":"))?;
        Region::ball(center, metric::parse_radius(r)?)
    }

    /// The coarsest level at which the region's boundary consists of
    /// vertices, so that restricted energies of PA functions stabilise.
    pub fn resolution(&self) -> Result<u32> {
        match self {
            Region::Whole => Ok(0),
            Region::Cell(w) => Ok(w.level()),
            Region::Vertices { level, .. } => Ok(*level),
            Region::Ball { center, radius } => {
                let k = triadic_level(radius).ok_or_else(|| {
                    Error::Resolution(format!("radius {radius} is not triadic; no finite level resolves the ball"))
                })?;
                Ok(k.max(center.scale()))
            }
        }
    }

    /// Membership flags for the vertices of `g`.
    pub fn members(&self, g: &CableGraph) -> Result<Vec<bool>> {
        match self {
            Region::Whole => Ok(vec![true; g.vertex_count()]),
            Region::Cell(w) => {
                let map = w.map();
                Ok((0..g.vertex_count()).map(|v| map.square_contains(&g.point(v))).collect())
            }
            Region::Vertices { level, ids } => {
                if *level != g.level() {
                    return Err(Error::Region(format!(
                        "vertex set is given at level {level}, not {}",
                        g.level()
                    )));
                }
                let mut flags = vec![false; g.vertex_count()];
                for &v in ids {
                    *flags
                        .get_mut(v)
                        .ok_or_else(|| Error::Lookup(format!("vertex id {v} out of range")))? = true;
                }
                if !induces_subtree(g, &flags) {
                    return Err(Error::Region("vertex set is not geodesically convex".into()));
                }
                Ok(flags)
            }
            Region::Ball { center, radius } => {
                let steps = distances_from(g, center)?;
                let scale = g.level().max(center.scale());
                Ok(steps.into_iter().map(|s| Length::new(s, scale).cmp_radius(radius).is_le()).collect())
            }
        }
    }
}

/// Steps (at scale `max(m, center scale)`) from the center to every vertex.
pub(crate) fn distances_from(g: &CableGraph, center: &LatticePoint) -> Result<Vec<u64>> {
    if let Some(c) = g.find_vertex(center) {
        let mut dist = vec![u64::MAX; g.vertex_count()];
        dist[c] = 0;
        let mut q = VecDeque::from([c]);
        while let Some(u) = q.pop_front() {
            for (v, _) in g.neighbors(u) {
                if dist[v] == u64::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        return Ok(dist);
    }
    let scale = g.level().max(center.scale());
    (0..g.vertex_count())
        .map(|v| metric::distance_at(center, &g.point(v), scale).map(|l| l.steps))
        .collect()
}

/// In a tree, a vertex set is geodesically convex iff it induces a
/// connected subgraph.
fn induces_subtree(g: &CableGraph, flags: &[bool]) -> bool {
    let Some(start) = flags.iter().position(|&f| f) else {
        return true;
    };
    let mut seen = vec![false; flags.len()];
    seen[start] = true;
    let mut q = VecDeque::from([start]);
    let mut count = 1;
    while let Some(u) = q.pop_front() {
        for (v, _) in g.neighbors(u) {
            if flags[v] && !seen[v] {
                seen[v] = true;
                count += 1;
                q.push_back(v);
            }
        }
    }
    count == flags.iter().filter(|&&f| f).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::graph::shared_graph;

    #[test]
    fn parsing() {
        assert_eq!(Region::parse("whole").unwrap(), Region::Whole);
        assert_eq!(Region::parse("cell:52").unwrap(), Region::Cell("52".parse().unwrap()));
        let b = Region::parse("center:3^-2").unwrap();
        assert_eq!(b, Region::Ball { center: LatticePoint::center(), radius: Ratio::new(1, 9) });
        assert_eq!(b.resolution().unwrap(), 2);
        assert!(Region::parse("center:1/2").unwrap().resolution().is_err());
        assert!(Region::parse("center:0").is_err());
    }

    #[test]
    fn central_ball_membership() {
        let g = shared_graph(2).unwrap();
        let b = Region::parse("center:3^-1").unwrap();
        let flags = b.members(&g).unwrap();
        // the central level-1 cell has 21 vertices at level 2
        assert_eq!(flags.iter().filter(|&&f| f).count(), 21);
        let c = Region::Cell("5".parse().unwrap()).members(&g).unwrap();
        assert_eq!(flags, c);
    }

    #[test]
    fn non_convex_vertex_sets_are_rejected() {
        let g = shared_graph(0).unwrap();
        let leaves: Vec<usize> = (0..5).filter(|&v| v != g.root()).collect();
        let r = Region::Vertices { level: 0, ids: leaves[..2].to_vec() };
        assert!(matches!(r.members(&g), Err(Error::Region(_))));
        let ok = Region::Vertices { level: 0, ids: vec![g.root(), leaves[0]] };
        assert!(ok.members(&g).is_ok());
    }
}

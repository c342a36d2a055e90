//! Geodesic balls: exact measures and level-`m` cell classification.
//!
//! The measure of a ball centred at a cell vertex obeys a self-similar
//! recursion. With `ρ` measured in units of the cell's own scale,
//!
//! ```text
//! F_center(ρ) = F_center(3ρ)/5 + 4·F_corner(3ρ − 1)/5
//! F_corner(ρ) = [F_corner(3ρ) + F_corner(3ρ − 2) + 3·F_corner(3ρ − 4)]/5
//! ```
//!
//! with `F = 0` for `ρ ≤ 0`, `F_center = 1` for `ρ ≥ 1` and `F_corner = 1`
//! for `ρ ≥ 2`. A ball around an arbitrary lattice point decomposes into such
//! terms along the cells that contain the point.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::address::{Address, CellMap, Digit};
use crate::geometry::lattice::LatticePoint;
use crate::geometry::metric::{self, Length, Radius};

/// Which fixed point of a cell a ball is centred at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Profile {
    Center,
    Corner,
}

enum Step<T> {
    Done(T),
    /// `F(ρ) = a + b·F'(ρ')`.
    Affine { a: T, b: T, kind: Profile, rho: T },
}

fn step<T>(kind: Profile, rho: &T) -> Step<T>
where
    T: Clone + PartialOrd + num_traits::Num + num_traits::FromPrimitive,
{
    let c = |x: i64| T::from_i64(x).expect("small integer");
    let frac = |n: i64, d: i64| c(n) / c(d);
    let three = c(3);
    if *rho <= T::zero() {
        return Step::Done(T::zero());
    }
    match kind {
        Profile::Center => {
            if *rho >= T::one() {
                Step::Done(T::one())
            } else if *rho <= frac(1, 3) {
                Step::Affine { a: T::zero(), b: frac(1, 5), kind: Profile::Center, rho: three * rho.clone() }
            } else {
                Step::Affine { a: frac(1, 5), b: frac(4, 5), kind: Profile::Corner, rho: three * rho.clone() - c(1) }
            }
        }
        Profile::Corner => {
            if *rho >= c(2) {
                Step::Done(T::one())
            } else if *rho < frac(2, 3) {
                Step::Affine { a: T::zero(), b: frac(1, 5), kind: Profile::Corner, rho: three * rho.clone() }
            } else if *rho < frac(4, 3) {
                Step::Affine { a: frac(1, 5), b: frac(1, 5), kind: Profile::Corner, rho: three * rho.clone() - c(2) }
            } else {
                Step::Affine { a: frac(2, 5), b: frac(3, 5), kind: Profile::Corner, rho: three * rho.clone() - c(4) }
            }
        }
    }
}

/// `F_kind(ρ)` in floating point. The recursion runs until the weight of
/// the unresolved remainder drops below `1e-18`.
pub fn ball_profile_f64(kind: Profile, rho: f64) -> f64 {
    let (mut acc, mut weight, mut kind, mut rho) = (0.0, 1.0, kind, rho);
    for _ in 0..400 {
        match step(kind, &rho) {
            Step::Done(v) => return acc + weight * v,
            Step::Affine { a, b, kind: k, rho: r } => {
                acc += weight * a;
                weight *= b;
                kind = k;
                rho = r;
            }
        }
        if weight < 1e-18 {
            break;
        }
    }
    acc + weight * 0.5
}

/// `F_kind(ρ)` exactly. The orbit of a rational `ρ` is eventually periodic,
/// which turns the recursion into a linear equation. Returns `None` if the
/// orbit does not close within `max_steps`.
pub fn ball_profile_exact(kind: Profile, rho: &BigRational, max_steps: usize) -> Option<BigRational> {
    let mut seen: HashMap<(Profile, BigRational), usize> = HashMap::new();
    let mut chain: Vec<(BigRational, BigRational)> = Vec::new();
    let (mut kind, mut rho) = (kind, rho.clone());
    let tail = loop {
        if chain.len() > max_steps {
            return None;
        }
        if let Some(&i) = seen.get(&(kind, rho.clone())) {
            // F(s_i) = A + B·F(s_i) over the cycle i..len
            let (mut a, mut b) = (BigRational::zero(), BigRational::one());
            for (ai, bi) in chain[i..].iter().rev() {
                a = ai + bi * a;
                b = bi * b;
            }
            let fixed = a / (BigRational::one() - b);
            chain.truncate(i);
            break fixed;
        }
        match step(kind, &rho) {
            Step::Done(v) => break v,
            Step::Affine { a, b, kind: k, rho: r } => {
                seen.insert((kind, rho.clone()), chain.len());
                chain.push((a, b));
                kind = k;
                rho = r;
            }
        }
    };
    Some(chain.iter().rev().fold(tail, |acc, (a, b)| a + b * acc))
}

#[derive(Clone, Copy, Debug)]
struct Term {
    level: u32,
    /// Distance from the center to the cell's gateway, in steps at the profile scale.
    offset: u64,
    kind: Profile,
}

/// Decomposition of `r ↦ μ(B(x, r))` for a fixed center `x`.
#[derive(Clone, Debug)]
pub struct BallProfile {
    center: LatticePoint,
    scale: u32,
    terms: Vec<Term>,
}

fn cell_corner(map: &CellMap, d: Digit) -> LatticePoint {
    map.apply(&d.point())
}

impl BallProfile {
    pub fn new(center: &LatticePoint) -> Result<Self> {
        if !metric::on_fractal(center) {
            return Err(Error::Domain(format!("{center:?} is not a point of the fractal")));
        }
        let scale = center.scale();
        let mut terms = Vec::new();
        let mut stack = vec![Address::root()];
        while let Some(w) = stack.pop() {
            let map = w.map();
            if let Some(d) = Digit::ALL.into_iter().find(|&d| cell_corner(&map, d) == *center) {
                let kind = if d.is_center() { Profile::Center } else { Profile::Corner };
                terms.push(Term { level: w.level(), offset: 0, kind });
                continue;
            }
            for child in w.children() {
                let cmap = child.map();
                if cmap.square_contains(center) {
                    stack.push(child);
                } else {
                    let offset = Digit::CORNERS
                        .iter()
                        .map(|&d| metric::distance_at(center, &cell_corner(&cmap, d), scale).map(|l| l.steps))
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .min()
                        .expect("four corners");
                    terms.push(Term { level: child.level(), offset, kind: Profile::Corner });
                }
            }
        }
        Ok(Self { center: *center, scale, terms })
    }

    pub fn center(&self) -> &LatticePoint {
        &self.center
    }

    /// `μ(B(x, r))` in floating point.
    pub fn measure_f64(&self, r: f64) -> f64 {
        let unit = 3f64.powi(-(self.scale as i32));
        let mut total = 0.0;
        for t in &self.terms {
            let rho = 3f64.powi(t.level as i32) * (r - t.offset as f64 * unit);
            if rho > 0.0 {
                total += 5f64.powi(-(t.level as i32)) * ball_profile_f64(t.kind, rho);
            }
        }
        total.min(1.0)
    }

    /// `μ(B(x, r))` exactly, when every orbit closes quickly.
    pub fn measure_exact(&self, r: &Radius) -> Option<BigRational> {
        let r = BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()));
        let unit = BigRational::new(BigInt::one(), BigInt::from(3).pow(self.scale));
        let mut total = BigRational::zero();
        for t in &self.terms {
            let rho = BigRational::from_integer(BigInt::from(3).pow(t.level))
                * (&r - BigRational::from_integer(BigInt::from(t.offset)) * &unit);
            if rho > BigRational::zero() {
                let f = ball_profile_exact(t.kind, &rho, 100_000)?;
                total += f / BigRational::from_integer(BigInt::from(5).pow(t.level));
            }
        }
        Some(total)
    }
}

/// A closed ball resolved into level-`m` cells.
#[derive(Clone, Debug, Serialize)]
pub struct BallApprox {
    #[serde(serialize_with = "ser_point")]
    pub center: LatticePoint,
    #[serde(serialize_with = "ser_radius")]
    pub radius: Radius,
    pub level: u32,
    /// Cells contained in the ball.
    #[serde(skip)]
    pub inner: Vec<Address>,
    /// Cells that meet the ball in a set of positive measure without being contained in it.
    #[serde(skip)]
    pub boundary: Vec<Address>,
    pub inner_count: usize,
    pub boundary_count: usize,
    pub mu_lo: f64,
    pub mu_hi: f64,
    /// Exact `μ(B)`, evaluated by the self-similar recursion.
    pub mu: f64,
}

fn ser_point<S: serde::Serializer>(p: &LatticePoint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

fn ser_radius<S: serde::Serializer>(r: &Radius, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn check_ball(center: &LatticePoint, r: &Radius, m: u32) -> Result<()> {
    if *r <= Ratio::from_integer(0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if center.scale() > m {
        return Err(Error::Resolution(format!(
            "center {center:?} is not a vertex of level {m}"
        )));
    }
    if !metric::on_fractal(center) {
        return Err(Error::Domain(format!("{center:?} is not a point of the fractal")));
    }
    Ok(())
}

/// Classifies level-`m` cells against the closed ball `B(center, r)`.
///
/// Over a cell, the distance to the center attains its extremes at the
/// cell's corners (the tree enters a cell through a corner, and corners are
/// the farthest points from any point of the cell), so both tests are exact.
pub fn ball_cells(center: &LatticePoint, r: &Radius, m: u32) -> Result<BallApprox> {
    check_ball(center, r, m)?;
    let scale = m.max(center.scale());
    let mut inner = Vec::new();
    let mut boundary = Vec::new();
    let mut stack = vec![Address::root()];
    while let Some(w) = stack.pop() {
        let map = w.map();
        let mut dmin = u64::MAX;
        let mut dmax = 0u64;
        for d in Digit::CORNERS {
            let l = metric::distance_at(center, &cell_corner(&map, d), scale)?;
            dmin = dmin.min(l.steps);
            dmax = dmax.max(l.steps);
        }
        let contains = map.square_contains(center);
        if Length::new(dmax, scale).cmp_radius(r).is_le() {
            inner.extend(w.descendant_range(m).map(|i| Address::from_index(m, i).expect("in range")));
        } else if !contains && Length::new(dmin, scale).cmp_radius(r).is_ge() {
            continue;
        } else if w.level() == m {
            boundary.push(w);
        } else {
            stack.extend(w.children());
        }
    }
    inner.sort();
    boundary.sort();
    let cell = 5f64.powi(-(m as i32));
    let profile = BallProfile::new(center)?;
    let mu = profile.measure_f64(*r.numer() as f64 / *r.denom() as f64);
    Ok(BallApprox {
        center: *center,
        radius: *r,
        level: m,
        inner_count: inner.len(),
        boundary_count: boundary.len(),
        mu_lo: inner.len() as f64 * cell,
        mu_hi: (inner.len() + boundary.len()) as f64 * cell,
        mu,
        inner,
        boundary,
    })
}

/// `(μ_lo, μ_hi)` for the ball at resolution `m`.
pub fn ball_measure(center: &LatticePoint, r: &Radius, m: u32) -> Result<(f64, f64)> {
    if *r >= Ratio::from_integer(2) {
        check_ball(center, r, m)?;
        return Ok((1.0, 1.0));
    }
    let b = ball_cells(center, r, m)?;
    Ok((b.mu_lo, b.mu_hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn profile_anchor_values() {
        assert_eq!(ball_profile_exact(Profile::Center, &q(1, 1), 10).unwrap(), q(1, 1));
        assert_eq!(ball_profile_exact(Profile::Center, &q(1, 3), 100).unwrap(), q(1, 5));
        assert_eq!(ball_profile_exact(Profile::Corner, &q(2, 3), 100).unwrap(), q(1, 5));
        // F_corner(1) = 1/5 + F_corner(1)/5
        assert_eq!(ball_profile_exact(Profile::Corner, &q(1, 1), 100).unwrap(), q(1, 4));
        assert!((ball_profile_f64(Profile::Corner, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn profile_is_monotone_and_continuous() {
        let mut prev = 0.0;
        for i in 0..=2000 {
            let rho = i as f64 / 1000.0;
            let v = ball_profile_f64(Profile::Corner, rho);
            assert!(v + 1e-15 >= prev);
            // Hölder of order log(5/3)/log 3 at ρ = 2, so steps of 1e-3 move F by up to ~0.04
            assert!(v - prev < 0.05);
            prev = v;
        }
    }

    #[test]
    fn central_triadic_balls() {
        for n in 0..4 {
            let r = Ratio::new(1, 3i64.pow(n));
            let b = ball_cells(&LatticePoint::center(), &r, n + 2).unwrap();
            assert_eq!(b.boundary_count, 0);
            assert_eq!(b.inner_count, 25);
            let exact = BallProfile::new(&LatticePoint::center()).unwrap().measure_exact(&r).unwrap();
            assert_eq!(exact, q(1, 5i64.pow(n)));
        }
    }

    #[test]
    fn radius_two_covers_everything() {
        let b = ball_cells(&Digit::Q1.point(), &Ratio::from_integer(2), 2).unwrap();
        assert_eq!((b.mu_lo, b.mu_hi), (1.0, 1.0));
        assert_eq!(ball_measure(&LatticePoint::center(), &Ratio::from_integer(3), 4).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn invalid_balls() {
        let c = LatticePoint::center();
        assert!(matches!(ball_cells(&c, &Ratio::from_integer(0), 2), Err(Error::Domain(_))));
        assert!(matches!(ball_cells(&LatticePoint::new(1, 1, 3), &Ratio::new(1, 3), 2), Err(Error::Resolution(_))));
    }
}

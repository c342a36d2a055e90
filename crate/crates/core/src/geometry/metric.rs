//! Geodesic distances by descent through the cell tree.
//!
//! Distances are counted in steps of `3^{-s}` at a working scale `s`. A step
//! count is invariant under rescaling into a subcell (lengths triple while
//! the scale drops by one), so the descent only adds the gateway constants of
//! the level-1 cross at each stage.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::geometry::address::Digit;
use crate::geometry::lattice::LatticePoint;

/// An exact radius.
pub type Radius = Ratio<i64>;

/// A geodesic length `steps · 3^{-level}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Length {
    pub steps: u64,
    pub level: u32,
}

impl Length {
    pub fn new(steps: u64, level: u32) -> Self {
        Self { steps, level }
    }

    pub fn to_f64(self) -> f64 {
        self.steps as f64 / 3f64.powi(self.level as i32)
    }

    /// Exact comparison against a rational radius.
    pub fn cmp_radius(self, r: &Radius) -> Ordering {
        let lhs = self.steps as i128 * *r.denom() as i128;
        let rhs = *r.numer() as i128 * 3i128.pow(self.level);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/3^{}", self.steps, self.level)
    }
}

impl PartialOrd for Length {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Length {
    fn cmp(&self, other: &Self) -> Ordering {
        let m = self.level.max(other.level);
        let a = self.steps as u128 * 3u128.pow(m - self.level);
        let b = other.steps as u128 * 3u128.pow(m - other.level);
        a.cmp(&b)
    }
}

/// Parses `3^-k`, `c*3^-k`, `a/b`, an integer, or a finite decimal.
pub fn parse_radius(s: &str) -> Result<Radius> {
    let s = s.trim();
    let bad = || Error::Format(format!("cannot parse radius {s:?}"));
    let r = if let Some((coef, pow)) = s.split_once("3^-") {
        let k: u32 = pow.trim().parse().map_err(|_| bad())?;
        let coef = coef.trim().trim_end_matches('*').trim();
        let c: i64 = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| bad())? };
        Ratio::new(c, 3i64.checked_pow(k).ok_or_else(bad)?)
    } else if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ratio::new(n, d)
    } else if let Some((int, frac)) = s.split_once('.') {
        let digits = frac.len() as u32;
        if digits > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let f: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let den = 10i64.pow(digits);
        Ratio::new(whole * den + f, den)
    } else {
        Ratio::from_integer(s.parse().map_err(|_| bad())?)
    };
    Ok(r)
}

/// The largest `k` with `3^k` dividing the denominator, if the denominator is
/// a pure power of three.
pub fn triadic_level(r: &Radius) -> Option<u32> {
    let mut d = *r.denom();
    let mut k = 0;
    while d % 3 == 0 {
        d /= 3;
        k += 1;
    }
    (d == 1).then_some(k)
}

fn thirds(d: Digit) -> (i64, i64) {
    d.fixed_point()
}

/// Level-1 subcells containing the point `(a, b)` at scale `s ≥ 1`, in digit
/// order. At most two cells meet at any point.
fn subcells(a: i64, b: i64, s: u32) -> ([Digit; 2], usize) {
    let t = 2 * 3i64.pow(s - 1);
    let mut out = [Digit::CENTER; 2];
    let mut n = 0;
    for d in Digit::ALL {
        let (fx, fy) = thirds(d);
        if (fx * t..=(fx + 1) * t).contains(&a) && (fy * t..=(fy + 1) * t).contains(&b) {
            out[n] = d;
            n += 1;
            if n == 2 {
                break;
            }
        }
    }
    (out, n)
}

fn localize(a: i64, b: i64, s: u32, d: Digit) -> (i64, i64) {
    let t = 2 * 3i64.pow(s - 1);
    let (fx, fy) = thirds(d);
    (a - fx * t, b - fy * t)
}

fn base_point(a: i64, b: i64) -> Option<Digit> {
    Digit::ALL.into_iter().find(|d| d.fixed_point() == (a, b))
}

fn base_distance(x: Digit, y: Digit) -> u64 {
    if x == y {
        0
    } else if x.is_center() || y.is_center() {
        1
    } else {
        2
    }
}

/// Steps from `(a, b)` at scale `s` to the fixed point `q_k` of the frame.
pub(crate) fn steps_to_fixed(mut a: i64, mut b: i64, mut s: u32, mut k: Digit) -> Option<u64> {
    let mut acc = 0u64;
    loop {
        if s == 0 {
            return base_point(a, b).map(|x| acc + base_distance(x, k));
        }
        let (subs, n) = subcells(a, b, s);
        if n == 0 {
            return None;
        }
        let t3 = 3u64.pow(s - 1);
        if subs[..n].contains(&k) {
            (a, b) = localize(a, b, s, k);
        } else {
            let j = subs[0];
            (a, b) = localize(a, b, s, j);
            if k.is_center() {
                acc += t3;
                k = j.opposite();
            } else if j.is_center() {
                acc += 2 * t3;
            } else {
                acc += 4 * t3;
                k = j.opposite();
            }
        }
        s -= 1;
    }
}

/// Steps between two points given by numerators at the common scale `s`.
pub(crate) fn steps_between(mut x: (i64, i64), mut y: (i64, i64), mut s: u32) -> Option<u64> {
    loop {
        if s == 0 {
            let (p, q) = (base_point(x.0, x.1)?, base_point(y.0, y.1)?);
            return Some(base_distance(p, q));
        }
        let (sx, nx) = subcells(x.0, x.1, s);
        let (sy, ny) = subcells(y.0, y.1, s);
        if nx == 0 || ny == 0 {
            return None;
        }
        if let Some(&c) = sx[..nx].iter().find(|d| sy[..ny].contains(d)) {
            x = localize(x.0, x.1, s, c);
            y = localize(y.0, y.1, s, c);
            s -= 1;
            continue;
        }
        let (i, j) = (sx[0], sy[0]);
        let xl = localize(x.0, x.1, s, i);
        let yl = localize(y.0, y.1, s, j);
        let t3 = 3u64.pow(s - 1);
        let rest = if i.is_center() {
            steps_to_fixed(xl.0, xl.1, s - 1, j)? + steps_to_fixed(yl.0, yl.1, s - 1, j.opposite())?
        } else if j.is_center() {
            steps_to_fixed(xl.0, xl.1, s - 1, i.opposite())? + steps_to_fixed(yl.0, yl.1, s - 1, i)?
        } else {
            steps_to_fixed(xl.0, xl.1, s - 1, i.opposite())?
                + 2 * t3
                + steps_to_fixed(yl.0, yl.1, s - 1, j.opposite())?
        };
        return Some(rest);
    }
}

/// Exact geodesic distance between two points of `K`, at scale `m` (which
/// must be at least both points' scales).
pub fn distance_at(x: &LatticePoint, y: &LatticePoint, m: u32) -> Result<Length> {
    let (px, py) = match (x.at_scale(m), y.at_scale(m)) {
        (Some(px), Some(py)) => (px, py),
        _ => return Err(Error::Domain(format!("scale {m} is too coarse for {x:?} and {y:?}"))),
    };
    steps_between(px, py, m)
        .map(|steps| Length::new(steps, m))
        .ok_or_else(|| Error::Domain(format!("{x:?} or {y:?} is not a point of the fractal")))
}

/// Exact geodesic distance between two points of `K`.
pub fn distance(x: &LatticePoint, y: &LatticePoint) -> Result<Length> {
    distance_at(x, y, x.scale().max(y.scale()))
}

/// Whether the lattice point lies on `K` (equivalently, is a vertex of
/// `V_{scale}`).
pub fn on_fractal(p: &LatticePoint) -> bool {
    let (a, b) = p.at_scale(p.scale()).expect("own scale");
    steps_to_fixed(a, b, p.scale(), Digit::CENTER).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::address::Address;

    #[test]
    fn fixed_point_distances() {
        let q = |d: u8| Digit::new(d).unwrap().point();
        assert_eq!(distance(&q(1), &q(2)).unwrap().to_f64(), 2.0);
        assert_eq!(distance(&q(1), &q(5)).unwrap().to_f64(), 1.0);
        assert_eq!(distance(&q(3), &q(3)).unwrap().steps, 0);
    }

    #[test]
    fn center_to_child_center() {
        let c2 = Address::from_digits(&[2]).unwrap().vertex(Digit::CENTER);
        let d = distance(&LatticePoint::center(), &c2).unwrap();
        assert_eq!(d, Length::new(2, 1));
    }

    #[test]
    fn points_off_the_fractal_are_rejected() {
        // the middle of the bottom edge is not on K
        let p = LatticePoint::new(1, 0, 0);
        assert!(!on_fractal(&p));
        assert!(distance(&p, &LatticePoint::center()).is_err());
        assert!(on_fractal(&LatticePoint::new(4, 4, 1)));
    }

    #[test]
    fn radius_parsing() {
        assert_eq!(parse_radius("3^-3").unwrap(), Ratio::new(1, 27));
        assert_eq!(parse_radius("2*3^-2").unwrap(), Ratio::new(2, 9));
        assert_eq!(parse_radius("1/9").unwrap(), Ratio::new(1, 9));
        assert_eq!(parse_radius("0.5").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_radius("2").unwrap(), Ratio::from_integer(2));
        assert!(parse_radius("abc").is_err());
        assert_eq!(triadic_level(&Ratio::new(2, 9)), Some(2));
        assert_eq!(triadic_level(&Ratio::new(1, 2)), None);
    }

    #[test]
    fn length_ordering_across_levels() {
        assert_eq!(Length::new(3, 1).cmp(&Length::new(1, 0)), Ordering::Equal);
        assert_eq!(Length::new(1, 2).cmp_radius(&Ratio::new(1, 9)), Ordering::Equal);
        assert_eq!(Length::new(2, 2).cmp_radius(&Ratio::new(1, 9)), Ordering::Greater);
    }
}

//! Exact points of the form `(a, b) / (2·3^m)` in the unit square.

use std::fmt;

use crate::error::{Error, Result};

/// A point `(a, b) / (2·3^scale)` kept in canonical (minimal-scale) form,
/// so that structural equality is point equality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    a: i64,
    b: i64,
    scale: u32,
}

impl LatticePoint {
    pub fn new(mut a: i64, mut b: i64, mut scale: u32) -> Self {
        while scale > 0 && a % 3 == 0 && b % 3 == 0 {
            a /= 3;
            b /= 3;
            scale -= 1;
        }
        Self { a, b, scale }
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    /// Minimal scale exponent of the point.
    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Numerators at a finer scale, or `None` if `m` is too coarse.
    pub fn at_scale(&self, m: u32) -> Option<(i64, i64)> {
        (m >= self.scale).then(|| {
            let f = 3i64.pow(m - self.scale);
            (self.a * f, self.b * f)
        })
    }

    pub fn to_unit_square(&self) -> (f64, f64) {
        let den = 2.0 * 3f64.powi(self.scale as i32);
        (self.a as f64 / den, self.b as f64 / den)
    }

    pub fn center() -> Self {
        Self::new(1, 1, 0)
    }

    /// Accepts `center`, `q1`..`q5`, or `a:b:m` (numerators and scale).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "center" | "q5" => return Ok(Self::center()),
            "q1" => return Ok(Self::new(0, 2, 0)),
            "q2" => return Ok(Self::new(2, 2, 0)),
            "q3" => return Ok(Self::new(2, 0, 0)),
            "q4" => return Ok(Self::new(0, 0, 0)),
            _ => {}
        }
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Format(format!("cannot parse point {s:?}")));
        }
        let num = |t: &str| t.trim().parse::<i64>().map_err(|e| Error::Format(format!("{t:?}: {e}")));
        let m = parts[2].trim().parse::<u32>().map_err(|e| Error::Format(format!("{:?}: {e}", parts[2])))?;
        Ok(Self::new(num(parts[0])?, num(parts[1])?, m))
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})/(2·3^{})", self.a, self.b, self.scale)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.a, self.b, self.scale)
    }
}

//! Words over the five contractions and the similarity maps they induce.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::lattice::LatticePoint;

/// Longest word that fits the base-5 code in a `u64`.
pub const MAX_ADDRESS_LEN: u32 = 27;

/// One of the five contractions: corners `1..=4` and the center `5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digit(u8);

impl Digit {
    pub const Q1: Digit = Digit(1);
    pub const Q2: Digit = Digit(2);
    pub const Q3: Digit = Digit(3);
    pub const Q4: Digit = Digit(4);
    pub const CENTER: Digit = Digit(5);
    pub const ALL: [Digit; 5] = [Digit(1), Digit(2), Digit(3), Digit(4), Digit(5)];
    pub const CORNERS: [Digit; 4] = [Digit(1), Digit(2), Digit(3), Digit(4)];

    pub fn new(d: u8) -> Result<Self> {
        if (1..=5).contains(&d) {
            Ok(Self(d))
        } else {
            Err(Error::InvalidAddress(format!("digit {d} is not in 1..=5")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Position of the corresponding fixed point in a cell's vertex array.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn is_center(self) -> bool {
        self.0 == 5
    }

    /// The diagonally opposite corner; the center is its own opposite.
    pub fn opposite(self) -> Digit {
        match self.0 {
            1 => Digit(3),
            2 => Digit(4),
            3 => Digit(1),
            4 => Digit(2),
            _ => Digit(5),
        }
    }

    /// Lattice numerators of the fixed point `q_d` at scale 0.
    pub fn fixed_point(self) -> (i64, i64) {
        match self.0 {
            1 => (0, 2),
            2 => (2, 2),
            3 => (2, 0),
            4 => (0, 0),
            _ => (1, 1),
        }
    }

    pub fn point(self) -> LatticePoint {
        let (a, b) = self.fixed_point();
        LatticePoint::new(a, b, 0)
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A word `w = i_1 ⋯ i_n` selecting the cell `K_w = Ψ_w(K)`.
///
/// Stored as the base-5 number of `(i_1 - 1, …, i_n - 1)`, so at a fixed level
/// the lexicographic order of words equals the numeric order of codes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address {
    level: u8,
    code: u64,
}

impl Address {
    pub fn root() -> Self {
        Self { level: 0, code: 0 }
    }

    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        if digits.len() as u32 > MAX_ADDRESS_LEN {
            return Err(Error::InvalidAddress(format!(
                "address length {} exceeds {MAX_ADDRESS_LEN}",
                digits.len()
            )));
        }
        let mut a = Self::root();
        for &d in digits {
            a = a.child(Digit::new(d)?);
        }
        Ok(a)
    }

    /// The address with the given lexicographic index among level-`level` words.
    pub fn from_index(level: u32, index: u64) -> Result<Self> {
        if level > MAX_ADDRESS_LEN || index >= 5u64.pow(level) {
            return Err(Error::InvalidAddress(format!("index {index} out of range at level {level}")));
        }
        Ok(Self { level: level as u8, code: index })
    }

    pub fn level(&self) -> u32 {
        self.level as u32
    }

    /// Lexicographic index among the words of the same length.
    pub fn index(&self) -> u64 {
        self.code
    }

    /// The `k`-th digit, counting from 1.
    pub fn digit(&self, k: u32) -> Digit {
        assert!(k >= 1 && k <= self.level(), "digit position out of range");
        let shift = 5u64.pow(self.level() - k);
        Digit(((self.code / shift) % 5) as u8 + 1)
    }

    pub fn digits(&self) -> Vec<Digit> {
        (1..=self.level()).map(|k| self.digit(k)).collect()
    }

    pub fn last(&self) -> Option<Digit> {
        (self.level > 0).then(|| Digit((self.code % 5) as u8 + 1))
    }

    pub fn child(&self, d: Digit) -> Self {
        assert!(self.level() < MAX_ADDRESS_LEN, "address too long");
        Self { level: self.level + 1, code: self.code * 5 + (d.0 as u64 - 1) }
    }

    pub fn children(&self) -> [Address; 5] {
        Digit::ALL.map(|d| self.child(d))
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| Self { level: self.level - 1, code: self.code / 5 })
    }

    pub fn prefix(&self, k: u32) -> Self {
        assert!(k <= self.level());
        Self { level: k as u8, code: self.code / 5u64.pow(self.level() - k) }
    }

    pub fn is_prefix_of(&self, other: &Address) -> bool {
        self.level <= other.level && other.prefix(self.level()) == *self
    }

    pub fn concat(&self, other: &Address) -> Result<Self> {
        let level = self.level() + other.level();
        if level > MAX_ADDRESS_LEN {
            return Err(Error::InvalidAddress("concatenated address too long".into()));
        }
        Ok(Self { level: level as u8, code: self.code * 5u64.pow(other.level()) + other.code })
    }

    /// Indices of the level-`m` descendants, which form a contiguous range.
    pub fn descendant_range(&self, m: u32) -> std::ops::Range<u64> {
        assert!(m >= self.level());
        let f = 5u64.pow(m - self.level());
        self.code * f..(self.code + 1) * f
    }

    /// The similarity `Ψ_w`.
    pub fn map(&self) -> CellMap {
        let mut t = (0i64, 0i64);
        for d in self.digits() {
            let (c, e) = d.fixed_point();
            t = (3 * t.0 + 2 * c, 3 * t.1 + 2 * e);
        }
        CellMap { level: self.level(), tx: t.0, ty: t.1 }
    }

    /// The cell vertex `Ψ_w(q_d)`.
    pub fn vertex(&self, d: Digit) -> LatticePoint {
        self.map().apply(&d.point())
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({self})")
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.digits() {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for Address {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let digits = s
            .bytes()
            .map(|b| {
                if b.is_ascii_digit() {
                    Ok(b - b'0')
                } else {
                    Err(Error::InvalidAddress(format!("unexpected character in {s:?}")))
                }
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_digits(&digits)
    }
}

/// Where the geodesic from the center enters a cell: the cell's attachment
/// vertex, tracked digit by digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Anchor {
    /// The cell contains `q_5` as its own center.
    Center,
    /// The cell is entered through its corner `Ψ_w(q_d)`.
    Corner(Digit),
}

impl Anchor {
    pub fn step(self, d: Digit) -> Anchor {
        match self {
            Anchor::Center if d.is_center() => Anchor::Center,
            Anchor::Center => Anchor::Corner(d.opposite()),
            Anchor::Corner(a) if d == a || d.is_center() => Anchor::Corner(a),
            Anchor::Corner(_) => Anchor::Corner(d.opposite()),
        }
    }

    pub fn of(w: &Address) -> Anchor {
        w.digits().into_iter().fold(Anchor::Center, Anchor::step)
    }

    /// Position in the cell's vertex array (corners `0..4`, center `4`).
    pub fn slot(self) -> usize {
        match self {
            Anchor::Center => 4,
            Anchor::Corner(d) => d.slot(),
        }
    }

    pub fn digit(self) -> Digit {
        match self {
            Anchor::Center => Digit::CENTER,
            Anchor::Corner(d) => d,
        }
    }
}

/// The similarity `Ψ_w`: ratio `3^{-level}` followed by a translation whose
/// numerators `(tx, ty)` are given at scale `level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CellMap {
    pub level: u32,
    pub tx: i64,
    pub ty: i64,
}

impl CellMap {
    pub fn identity() -> Self {
        Self { level: 0, tx: 0, ty: 0 }
    }

    pub fn ratio(&self) -> f64 {
        3f64.powi(-(self.level as i32))
    }

    pub fn apply(&self, p: &LatticePoint) -> LatticePoint {
        let f = 3i64.pow(p.scale());
        LatticePoint::new(p.a() + self.tx * f, p.b() + self.ty * f, p.scale() + self.level)
    }

    /// Lower-left and upper-right numerators of `Ψ_w(K)` at scale `m ≥ level`.
    pub fn square_at(&self, m: u32) -> ((i64, i64), (i64, i64)) {
        let f = 3i64.pow(m - self.level);
        ((self.tx * f, self.ty * f), ((self.tx + 2) * f, (self.ty + 2) * f))
    }

    /// Whether the point lies in the closed bounding square of the cell.
    /// For points of `K` this is equivalent to lying in the cell itself.
    pub fn square_contains(&self, p: &LatticePoint) -> bool {
        let m = self.level.max(p.scale());
        let ((x0, y0), (x1, y1)) = self.square_at(m);
        let (a, b) = p.at_scale(m).expect("scale is at least the point's own");
        (x0..=x1).contains(&a) && (y0..=y1).contains(&b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_round_trip() {
        let a = Address::from_digits(&[5, 2, 1, 4]).unwrap();
        assert_eq!(a.to_string(), "5214");
        assert_eq!("5214".parse::<Address>().unwrap(), a);
        assert_eq!(a.parent().unwrap().to_string(), "521");
        assert_eq!(a.prefix(2).to_string(), "52");
        assert!(a.prefix(2).is_prefix_of(&a));
        assert!(Address::from_digits(&[0]).is_err());
        assert!(Address::from_digits(&[6]).is_err());
    }

    #[test]
    fn lexicographic_index() {
        let a = Address::from_digits(&[1, 1]).unwrap();
        let b = Address::from_digits(&[5, 5]).unwrap();
        assert_eq!(a.index(), 0);
        assert_eq!(b.index(), 24);
        assert_eq!(Address::from_index(2, 24).unwrap(), b);
    }

    #[test]
    fn empty_word_is_identity() {
        assert_eq!(Address::root().map(), CellMap::identity());
        let p = LatticePoint::new(1, 1, 0);
        assert_eq!(Address::root().map().apply(&p), p);
    }

    #[test]
    fn repeated_corner_fixes_corner() {
        for n in 1..6 {
            let w = Address::from_digits(&vec![2; n]).unwrap();
            assert_eq!(w.map().apply(&Digit::Q2.point()), Digit::Q2.point());
            assert_eq!(w.map().ratio(), 3f64.powi(-(n as i32)));
        }
    }

    #[test]
    fn anchor_automaton() {
        assert_eq!(Anchor::of(&Address::root()), Anchor::Center);
        assert_eq!(Anchor::of(&"55".parse().unwrap()), Anchor::Center);
        assert_eq!(Anchor::of(&"2".parse().unwrap()), Anchor::Corner(Digit::Q4));
        assert_eq!(Anchor::of(&"25".parse().unwrap()), Anchor::Corner(Digit::Q4));
        assert_eq!(Anchor::of(&"24".parse().unwrap()), Anchor::Corner(Digit::Q4));
        assert_eq!(Anchor::of(&"21".parse().unwrap()), Anchor::Corner(Digit::Q3));
    }

    #[test]
    fn center_map_on_corner() {
        // q5 + (q2 - q5)/3 = (2/3, 2/3)
        let w = Address::from_digits(&[5]).unwrap();
        let p = w.map().apply(&Digit::Q2.point());
        assert_eq!(p, LatticePoint::new(4, 4, 1));
        assert_eq!(p.to_unit_square(), (2.0 / 3.0, 2.0 / 3.0));
    }
}

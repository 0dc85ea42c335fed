//! Integer wavevectors, bounded lattice domains and the resonant-triad predicate.
//!
//! Everything here is exact integer arithmetic. A wavevector is a Fourier index
//! `(x, y)`; the box side only rescales it, and since both resonance conditions
//! are homogeneous the scale never enters a predicate.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible `bound`; keeps every squared norm far inside `i64`.
pub const MAX_LATTICE_BOUND: i32 = 1 << 15;

/// A Fourier mode index on the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveVector {
    pub x: i32,
    pub y: i32,
}

impl WaveVector {
    pub const ZERO: WaveVector = WaveVector { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    /// Exact squared norm `x² + y²`.
    pub fn norm2(self) -> i64 {
        let (x, y) = (i64::from(self.x), i64::from(self.y));
        x * x + y * y
    }

    pub fn dot(self, other: WaveVector) -> i64 {
        i64::from(self.x) * i64::from(other.x) + i64::from(self.y) * i64::from(other.y)
    }

    pub fn is_zero(self) -> bool {
        self == Self::ZERO
    }

    /// Largest absolute coordinate (the sup-norm used by [`Domain::bound`]).
    pub fn max_abs(self) -> u32 {
        self.x.unsigned_abs().max(self.y.unsigned_abs())
    }

    pub fn scale(self, c: i32) -> Self {
        Self::new(self.x * c, self.y * c)
    }

    /// Physical wavevector for a square box of side `side` (units of `1/side`).
    pub fn physical(self, side: u32) -> (f64, f64) {
        let s = f64::from(side);
        (f64::from(self.x) / s, f64::from(self.y) / s)
    }
}

impl Add for WaveVector {
    type Output = WaveVector;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for WaveVector {
    type Output = WaveVector;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for WaveVector {
    type Output = WaveVector;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl fmt::Display for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl FromStr for WaveVector {
    type Err = Error;

    /// Parses `X,Y` (parentheses optional).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("expected wavevector `X,Y`, got `{s}`"));
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (x, y) = trimmed.split_once(',').ok_or_else(bad)?;
        let x = x.trim().parse().map_err(|_| bad())?;
        let y = y.trim().parse().map_err(|_| bad())?;
        Ok(Self::new(x, y))
    }
}

impl From<(i32, i32)> for WaveVector {
    fn from((x, y): (i32, i32)) -> Self {
        Self::new(x, y)
    }
}

/// Shape of the periodic box in physical space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BoxShape {
    /// Square box with side `L` (in units of 2π).
    Square { side: u32 },
    /// Rectangle with coprime sides `p` and `q`.
    Rectangular { p: u32, q: u32 },
}

impl Default for BoxShape {
    fn default() -> Self {
        BoxShape::Square { side: 1 }
    }
}

impl fmt::Display for BoxShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoxShape::Square { side } => write!(f, "square:{side}"),
            BoxShape::Rectangular { p, q } => write!(f, "rect:{p},{q}"),
        }
    }
}

impl FromStr for BoxShape {
    type Err = Error;

    /// Parses `square:L` or `rect:p,q`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDomain(format!("expected `square:L` or `rect:p,q`, got `{s}`"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
        let shape = match kind {
            "square" => BoxShape::Square { side: parse(rest)? },
            "rect" => {
                let (p, q) = rest.split_once(',').ok_or_else(bad)?;
                BoxShape::Rectangular { p: parse(p)?, q: parse(q)? }
            }
            _ => return Err(bad()),
        };
        shape.validate()?;
        Ok(shape)
    }
}

impl TryFrom<String> for BoxShape {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BoxShape> for String {
    fn from(b: BoxShape) -> String {
        b.to_string()
    }
}

impl BoxShape {
    fn validate(&self) -> Result<()> {
        match *self {
            BoxShape::Square { side: 0 } => Err(Error::InvalidDomain("square side must be positive".into())),
            BoxShape::Rectangular { p, q } if p == 0 || q == 0 => {
                Err(Error::InvalidDomain("rectangle sides must be positive".into()))
            }
            BoxShape::Rectangular { p, q } if gcd(i64::from(p), i64::from(q)) != 1 => {
                Err(Error::NotCoprime { p: p.into(), q: q.into() })
            }
            _ => Ok(()),
        }
    }
}

/// A bounded window of the Fourier lattice: all `k` with `|k.x|, |k.y| <= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Domain {
    bound: i32,
    shape: BoxShape,
    include_zero: bool,
}

impl Domain {
    /// `bound = 0` is admitted; its only lattice point is the excluded zero vector.
    pub fn new(bound: i32, shape: BoxShape) -> Result<Self> {
        if !(0..=MAX_LATTICE_BOUND).contains(&bound) {
            return Err(Error::InvalidDomain(format!("bound must lie in [0, {MAX_LATTICE_BOUND}], got {bound}")));
        }
        shape.validate()?;
        Ok(Self { bound, shape, include_zero: false })
    }

    pub fn square(bound: i32) -> Result<Self> {
        Self::new(bound, BoxShape::Square { side: 1 })
    }

    pub fn rectangular(bound: i32, p: u32, q: u32) -> Result<Self> {
        Self::new(bound, BoxShape::Rectangular { p, q })
    }

    /// Re-admits the zero vector into [`Domain::vectors`]. It still never enters
    /// a triad or a resonance set.
    pub fn with_zero(mut self, include_zero: bool) -> Self {
        self.include_zero = include_zero;
        self
    }

    pub fn bound(&self) -> i32 {
        self.bound
    }

    pub fn shape(&self) -> BoxShape {
        self.shape
    }

    pub fn include_zero(&self) -> bool {
        self.include_zero
    }

    /// The same bound on the square box; the superset every rectangular set is filtered from.
    pub fn as_square(&self) -> Domain {
        Domain { shape: BoxShape::Square { side: 1 }, ..*self }
    }

    pub fn in_bound(&self, k: WaveVector) -> bool {
        k.max_abs() <= self.bound as u32
    }

    /// Admissible wavevectors in canonical (lexicographic) order.
    pub fn vectors(&self) -> Vec<WaveVector> {
        let b = self.bound;
        (-b..=b)
            .flat_map(|x| (-b..=b).map(move |y| WaveVector::new(x, y)))
            .filter(|k| self.include_zero || !k.is_zero())
            .collect()
    }

    /// Whether a triad passes the box filter (always true on the square box).
    pub fn admits(&self, t: &Triad) -> bool {
        match self.shape {
            BoxShape::Square { .. } => true,
            BoxShape::Rectangular { p, q } => rectangular_filter(t, p.into(), q.into()),
        }
    }
}

/// An ordered resonant triple `(k1, k2; k3)`; `k3` is the high-frequency slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triad {
    pub k1: WaveVector,
    pub k2: WaveVector,
    pub k3: WaveVector,
}

impl Triad {
    pub const fn new(k1: WaveVector, k2: WaveVector, k3: WaveVector) -> Self {
        Self { k1, k2, k3 }
    }

    /// Builds the triad `(k1, k2; k1 + k2)`.
    pub fn from_pair(k1: WaveVector, k2: WaveVector) -> Self {
        Self::new(k1, k2, k1 + k2)
    }

    /// Sum rule, frequency rule, orthogonality and non-degeneracy all hold.
    ///
    /// The frequency rule and orthogonality are checked separately even though
    /// one implies the other under the sum rule; a disagreement would be a bug.
    pub fn is_valid(&self) -> bool {
        let sum = self.k1 + self.k2 == self.k3;
        let freq = self.k1.norm2() + self.k2.norm2() == self.k3.norm2();
        let orth = self.k1.dot(self.k2) == 0;
        debug_assert!(!sum || freq == orth);
        sum && freq && orth && !self.has_zero()
    }

    pub fn has_zero(&self) -> bool {
        self.k1.is_zero() || self.k2.is_zero() || self.k3.is_zero()
    }

    pub fn members(&self) -> [WaveVector; 3] {
        [self.k1, self.k2, self.k3]
    }

    pub fn max_abs(&self) -> u32 {
        self.members().iter().map(|k| k.max_abs()).max().unwrap_or(0)
    }

    /// `(k2, k1; k3)`.
    pub fn swapped(&self) -> Self {
        Self::new(self.k2, self.k1, self.k3)
    }

    /// Representative of `{(k1,k2;k3), (k2,k1;k3)}` with `k1 < k2`.
    pub fn unordered(&self) -> Self {
        if self.k1 <= self.k2 {
            *self
        } else {
            self.swapped()
        }
    }

    pub fn map(&self, f: impl Fn(WaveVector) -> WaveVector) -> Self {
        Self::new(f(self.k1), f(self.k2), f(self.k3))
    }

    /// Canonical sort key: `(k3, k1)` lexicographically; `k2` is then determined.
    pub fn sort_key(&self) -> (WaveVector, WaveVector, WaveVector) {
        (self.k3, self.k1, self.k2)
    }
}

impl Ord for Triad {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Triad {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Triad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}; {}}}", self.k1, self.k2, self.k3)
    }
}

/// Whether `(k1, k2; k3)` is a non-degenerate resonant triad inside `domain`.
pub fn is_resonant_triad(k1: WaveVector, k2: WaveVector, k3: WaveVector, domain: &Domain) -> bool {
    let t = Triad::new(k1, k2, k3);
    t.is_valid() && t.members().iter().all(|&k| domain.in_bound(k)) && domain.admits(&t)
}

/// Every x-coordinate divisible by `p` and every y-coordinate by `q`.
pub fn satisfies_rectangular(t: &Triad, p: i64, q: i64) -> Result<bool> {
    if p <= 0 || q <= 0 {
        return Err(Error::InvalidDomain(format!("box sides must be positive, got {p},{q}")));
    }
    if gcd(p, q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    Ok(rectangular_filter(t, p, q))
}

fn rectangular_filter(t: &Triad, p: i64, q: i64) -> bool {
    t.members().iter().all(|k| i64::from(k.x) % p == 0 && i64::from(k.y) % q == 0)
}

pub(crate) fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

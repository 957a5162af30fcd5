//! Points and vectors of ℂⁿ.

use std::fmt;
use std::ops::{Add, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{input, Result};

pub type C64 = Complex64;

type Coords = SmallVec<[C64; 2]>;

/// A point (or vector) of ℂⁿ. Dimensions one and two are stored inline.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CoordRepr>", into = "Vec<CoordRepr>")]
pub struct ComplexPoint {
    coords: Coords,
}

/// JSON form of one coordinate: a bare real number or `[re, im]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl TryFrom<Vec<CoordRepr>> for ComplexPoint {
    type Error = crate::KobError;

    fn try_from(raw: Vec<CoordRepr>) -> Result<Self> {
        let coords = raw
            .into_iter()
            .map(|c| match c {
                CoordRepr::Real(x) => C64::new(x, 0.0),
                CoordRepr::Pair([re, im]) => C64::new(re, im),
            })
            .collect::<Vec<_>>();
        ComplexPoint::new(coords)
    }
}

impl From<ComplexPoint> for Vec<CoordRepr> {
    fn from(p: ComplexPoint) -> Self {
        p.coords.iter().map(|c| CoordRepr::Pair([c.re, c.im])).collect()
    }
}

impl ComplexPoint {
    pub fn new(coords: impl IntoIterator<Item = C64>) -> Result<Self> {
        let coords: Coords = coords.into_iter().collect();
        if coords.is_empty() {
            return input("complex point needs at least one coordinate");
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return input("complex point has a non-finite coordinate");
        }
        Ok(Self { coords })
    }

    /// Unchecked constructor for internal arithmetic on already-valid data.
    pub(crate) fn from_coords(coords: Coords) -> Self {
        Self { coords }
    }

    pub fn zeros(n: usize) -> Self {
        Self { coords: smallvec::smallvec![C64::new(0.0, 0.0); n] }
    }

    /// One-dimensional point `re + i·im`.
    pub fn scalar(re: f64, im: f64) -> Self {
        Self { coords: smallvec::smallvec![C64::new(re, im)] }
    }

    /// Point with real coordinates `(x₁, …, xₙ)`.
    pub fn real(xs: &[f64]) -> Self {
        Self { coords: xs.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    /// Builds a point from its 2n real coordinates `(re z₁, im z₁, re z₂, …)`.
    pub fn from_reals(xs: &[f64]) -> Self {
        debug_assert!(xs.len() % 2 == 0);
        Self { coords: xs.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect() }
    }

    pub fn to_reals(&self) -> SmallVec<[f64; 4]> {
        self.coords.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn coord(&self, j: usize) -> C64 {
        self.coords[j]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { coords: self.coords.iter().map(|c| c * t).collect() }
    }

    pub fn scale_c(&self, t: C64) -> Self {
        Self { coords: self.coords.iter().map(|c| c * t).collect() }
    }

    /// `self + t·dir`.
    pub fn add_scaled(&self, dir: &Self, t: C64) -> Self {
        Self { coords: self.coords.iter().zip(&dir.coords).map(|(a, d)| a + d * t).collect() }
    }

    /// `self + t·dir` for real `t`.
    pub fn offset(&self, dir: &Self, t: f64) -> Self {
        Self { coords: self.coords.iter().zip(&dir.coords).map(|(a, d)| a + d * t).collect() }
    }

    /// Point at parameter `t` of the segment from `self` to `other`.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        Self { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + (b - a) * t).collect() }
    }

    /// Hermitian product `⟨self, other⟩ = Σ selfⱼ · conj(otherⱼ)`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b.conj()).sum()
    }

    /// Unit vector in the direction of `self`; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    /// Splits into the first `k` coordinates and the rest.
    pub fn split(&self, k: usize) -> (Self, Self) {
        (
            Self { coords: self.coords[..k].iter().copied().collect() },
            Self { coords: self.coords[k..].iter().copied().collect() },
        )
    }

    pub fn concat(&self, other: &Self) -> Self {
        Self { coords: self.coords.iter().chain(&other.coords).copied().collect() }
    }
}

impl Add for &ComplexPoint {
    type Output = ComplexPoint;
    fn add(self, rhs: Self) -> ComplexPoint {
        ComplexPoint::from_coords(self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ComplexPoint {
    type Output = ComplexPoint;
    fn sub(self, rhs: Self) -> ComplexPoint {
        ComplexPoint::from_coords(self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Debug for ComplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, c) in self.coords.iter().enumerate() {
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", c.re, c.im)?;
        }
        write!(f, ")")
    }
}

/// A tangent vector `(z; v)` with `v ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: ComplexPoint,
    pub dir: ComplexPoint,
}

impl TangentVector {
    pub fn new(base: ComplexPoint, dir: ComplexPoint) -> Result<Self> {
        if base.dim() != dir.dim() {
            return input(format!(
                "tangent vector dimension {} does not match base dimension {}",
                dir.dim(),
                base.dim()
            ));
        }
        if dir.is_zero() {
            return input("tangent vector must be nonzero");
        }
        Ok(Self { base, dir })
    }
}

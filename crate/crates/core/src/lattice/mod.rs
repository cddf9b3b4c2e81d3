//! Integer-lattice machinery: points of `Z^d`, finite windows, subgroups,
//! coset representatives and Følner boxes.
//!
//! Every collection in this module iterates in lexicographic coordinate
//! order, so equal sets always serialize identically.

mod intmat;
mod subgroup;

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use subgroup::{
    coset_decompose, normal_form, CosetPart, Index, NormalForm, ShiftedTransversal, SubgroupBasis, Transversal,
    TransversalSection,
};

/// A point of `Z^d`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint(coords)
    }

    pub fn origin(dim: usize) -> Self {
        LatticePoint(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(coords: Vec<i64>) -> Self {
        LatticePoint(coords)
    }
}

impl From<&[i64]> for LatticePoint {
    fn from(coords: &[i64]) -> Self {
        LatticePoint(coords.to_vec())
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(coords: [i64; N]) -> Self {
        LatticePoint(coords.to_vec())
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for &LatticePoint {
    type Output = LatticePoint;

    fn add(self, rhs: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim(), rhs.dim());
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticePoint {
    type Output = LatticePoint;

    fn sub(self, rhs: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim(), rhs.dim());
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticePoint {
    type Output = LatticePoint;

    fn neg(self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|a| -a).collect())
    }
}

/// The group operations the window machinery relies on.
///
/// Only [`Zd`] implements it; the trait marks where another finitely
/// generated group would have to plug in.
pub trait Group {
    type Element: Clone + Ord;

    fn identity(&self) -> Self::Element;
    fn op(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn inverse(&self, a: &Self::Element) -> Self::Element;
}

/// The additive group `Z^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zd {
    pub dim: usize,
}

impl Group for Zd {
    type Element = LatticePoint;

    fn identity(&self) -> LatticePoint {
        LatticePoint::origin(self.dim)
    }

    fn op(&self, a: &LatticePoint, b: &LatticePoint) -> LatticePoint {
        a + b
    }

    fn inverse(&self, a: &LatticePoint) -> LatticePoint {
        -a
    }
}

/// A nonempty finite subset of `Z^d`, stored sorted and deduplicated.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiniteSet {
    dim: usize,
    points: Vec<LatticePoint>,
}

impl FiniteSet {
    /// Builds a set from arbitrary points; duplicates are merged.
    pub fn new(dim: usize, points: impl IntoIterator<Item = LatticePoint>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidWindow("dimension must be at least 1".into()));
        }
        let mut points: Vec<LatticePoint> = points.into_iter().collect();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::dim(dim, p.dim()));
        }
        if points.is_empty() {
            return Err(Error::InvalidWindow("finite set must be nonempty".into()));
        }
        points.sort();
        points.dedup();
        Ok(FiniteSet { dim, points })
    }

    pub fn singleton(point: LatticePoint) -> Self {
        FiniteSet {
            dim: point.dim(),
            points: vec![point],
        }
    }

    pub fn origin(dim: usize) -> Self {
        Self::singleton(LatticePoint::origin(dim))
    }

    /// Convenience constructor from coordinate slices.
    pub fn from_coords<I, P>(dim: usize, coords: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: Into<LatticePoint>,
    {
        Self::new(dim, coords.into_iter().map(Into::into))
    }

    /// The cube `{-r, ..., r}^d`.
    pub fn centered_cube(dim: usize, radius: i64) -> Self {
        let side = (2 * radius + 1) as u64;
        let b = folner_box(&vec![side; dim]).expect("valid sides");
        b.translate(&LatticePoint(vec![-radius; dim]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LatticePoint> {
        self.points.iter()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    /// Position of `p` in canonical order.
    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.points.binary_search(p).ok()
    }

    pub fn is_subset(&self, other: &FiniteSet) -> bool {
        self.points.iter().all(|p| other.contains(p))
    }

    pub fn translate(&self, v: &LatticePoint) -> FiniteSet {
        // Translation preserves lexicographic order.
        FiniteSet {
            dim: self.dim,
            points: self.points.iter().map(|p| p + v).collect(),
        }
    }

    pub fn union(&self, other: &FiniteSet) -> Result<FiniteSet> {
        if self.dim != other.dim {
            return Err(Error::dim(self.dim, other.dim));
        }
        FiniteSet::new(self.dim, self.points.iter().chain(&other.points).cloned())
    }

    pub fn intersects(&self, other: &FiniteSet) -> bool {
        self.points.iter().any(|p| other.contains(p))
    }

    /// Smallest and largest coordinate along every axis.
    pub fn bounds(&self) -> (LatticePoint, LatticePoint) {
        let mut lo = self.points[0].0.clone();
        let mut hi = lo.clone();
        for p in &self.points[1..] {
            for (i, &c) in p.0.iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        (LatticePoint(lo), LatticePoint(hi))
    }

    /// The smallest box containing the set.
    pub fn bounding_box(&self) -> FiniteSet {
        let (lo, hi) = self.bounds();
        let sides: Vec<u64> = lo.0.iter().zip(&hi.0).map(|(l, h)| (h - l + 1) as u64).collect();
        folner_box(&sides).expect("nonempty bounds").translate(&lo)
    }

    /// Translate so that the lexicographically least point is the origin.
    pub fn normalized(&self) -> (FiniteSet, LatticePoint) {
        let shift = self.points[0].clone();
        (self.translate(&-&shift), shift)
    }

    /// Whether the set is exactly a box `lo + prod [0, side_i)`.
    pub fn box_sides(&self) -> Option<Vec<u64>> {
        let (lo, hi) = self.bounds();
        let sides: Vec<u64> = lo.0.iter().zip(&hi.0).map(|(l, h)| (h - l + 1) as u64).collect();
        let volume: u64 = sides.iter().product();
        (volume == self.points.len() as u64).then_some(sides)
    }
}

impl fmt::Debug for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.points.iter()).finish()
    }
}

impl<'a> IntoIterator for &'a FiniteSet {
    type Item = &'a LatticePoint;
    type IntoIter = std::slice::Iter<'a, LatticePoint>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// The box `prod_i [0, side_i)`.
pub fn folner_box(sides: &[u64]) -> Result<FiniteSet> {
    if sides.is_empty() {
        return Err(Error::InvalidWindow("box needs at least one side".into()));
    }
    if let Some(s) = sides.iter().find(|&&s| s == 0) {
        return Err(Error::InvalidWindow(format!("box side {s} must be positive")));
    }
    let total: u64 = sides
        .iter()
        .try_fold(1u64, |acc, &s| acc.checked_mul(s))
        .ok_or_else(|| Error::InvalidWindow("box volume overflows".into()))?;
    let dim = sides.len();
    let mut points = Vec::with_capacity(total as usize);
    let mut cur = vec![0i64; dim];
    // Odometer with the last coordinate fastest gives lexicographic order.
    'outer: loop {
        points.push(LatticePoint(cur.clone()));
        for axis in (0..dim).rev() {
            cur[axis] += 1;
            if (cur[axis] as u64) < sides[axis] {
                continue 'outer;
            }
            cur[axis] = 0;
        }
        break;
    }
    Ok(FiniteSet { dim, points })
}

/// Minkowski sum `{f + s : f in window, s in shape}`; `shape` must contain
/// the origin so that the result contains `window`.
pub fn minkowski_extend(window: &FiniteSet, shape: &FiniteSet) -> Result<FiniteSet> {
    if window.dim() != shape.dim() {
        return Err(Error::dim(window.dim(), shape.dim()));
    }
    let group = Zd { dim: window.dim() };
    if !shape.contains(&group.identity()) {
        return Err(Error::InvalidShape("shape must contain the origin".into()));
    }
    FiniteSet::new(
        window.dim(),
        window.iter().flat_map(|f| shape.iter().map(move |s| group.op(f, s))),
    )
}

//! Finite-scale checks of strong irreducibility.
//!
//! A shift is `D`-strongly irreducible when any two patterns of its
//! language on sets `B1`, `B2` with `(D + B1) ∩ B2 = ∅` occur together in
//! one point. Here `B1` is a box at the origin, `B2` a translated box, both
//! with sides at most `scale` and the translation at most `2 * scale` in
//! each coordinate.
//!
//! For `X` a pair of boxes passes when the number of assignments to
//! `B1 ∪ B2` that extend to a locally admissible pattern on the
//! margin-extended bounding box equals `|L_B1| * |L_B2|`. Every extendable
//! assignment restricts to margin-language patterns on both boxes, so
//! equality means every pair glues. The explicit failing pair is only
//! searched for once a geometry fails.
//!
//! Margin languages are supersets of the true languages, so a pass tests
//! more pairs than necessary and stays meaningful; a counterexample is a
//! genuine refutation only when both box languages are certified exact.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use dashu::integer::UBig;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{folner_box, minkowski_extend, FiniteSet, LatticePoint, TransversalSection};
use crate::projection::{product_language, product_pieces};
use crate::shiftspace::search::{Cell, Compiled, FrontierDp};
use crate::shiftspace::{count_language, enumerate_language, language_is_exact, Limits, Membership, Pattern, SftSpec};

/// The separating shape `D`; always contains the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixingShape {
    points: FiniteSet,
}

impl MixingShape {
    pub fn new(points: FiniteSet) -> Result<Self> {
        if !points.iter().any(LatticePoint::is_origin) {
            return Err(Error::InvalidShape("mixing shape must contain the origin".into()));
        }
        Ok(MixingShape { points })
    }

    pub fn points(&self) -> &FiniteSet {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    PassAtScale,
    Counterexample,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::PassAtScale => "pass_at_scale",
            Status::Counterexample => "counterexample",
        }
    }
}

/// Two patterns on separated boxes that occur in no common pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub b1: FiniteSet,
    pub b2: FiniteSet,
    pub p1: Pattern,
    pub p2: Pattern,
    /// Both patterns come from certified-exact languages.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrreducibilityVerdict {
    pub status: Status,
    pub scale: u64,
    /// Box pairs examined (all of them on a pass).
    pub geometries_checked: usize,
    pub witness: Option<Witness>,
}

/// One pair of boxes.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Geometry {
    b1_sides: Vec<u64>,
    b2_sides: Vec<u64>,
    offset: LatticePoint,
}

impl Geometry {
    fn b1(&self) -> FiniteSet {
        folner_box(&self.b1_sides).expect("positive sides")
    }

    fn b2(&self) -> FiniteSet {
        folner_box(&self.b2_sides)
            .expect("positive sides")
            .translate(&self.offset)
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B1 {:?}, B2 {:?} at {}", self.b1_sides, self.b2_sides, self.offset)
    }
}

fn all_sides(dim: usize, scale: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (1..=scale).map(move |s| {
                    let mut w = v.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out
}

/// Separated box pairs in canonical order: B1 sides, B2 sides, sup norm
/// of the offset, then the offset.
fn geometries(shape: &MixingShape, scale: u64) -> Result<Vec<Geometry>> {
    let dim = shape.dim();
    let reach = 2 * scale as i64;
    let mut offsets: Vec<LatticePoint> = FiniteSet::centered_cube(dim, reach).points().to_vec();
    offsets.sort_by_key(|o| (o.coords().iter().map(|c| c.abs()).max().unwrap_or(0), o.clone()));
    let sides = all_sides(dim, scale);
    let mut out = Vec::new();
    for s1 in &sides {
        let b1 = folner_box(s1)?;
        let grown = minkowski_extend(&b1, shape.points())?;
        for s2 in &sides {
            let b2 = folner_box(s2)?;
            for o in &offsets {
                if !grown.intersects(&b2.translate(o)) {
                    out.push(Geometry {
                        b1_sides: s1.clone(),
                        b2_sides: s2.clone(),
                        offset: o.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

fn validate(sft: &SftSpec, shape: &MixingShape, scale: u64, margin: &FiniteSet) -> Result<()> {
    if shape.dim() != sft.dim() {
        return Err(Error::dim(sft.dim(), shape.dim()));
    }
    if margin.dim() != sft.dim() {
        return Err(Error::dim(sft.dim(), margin.dim()));
    }
    if scale == 0 {
        return Err(Error::InvalidWindow("scale must be at least 1".into()));
    }
    Ok(())
}

fn with_geometry(g: &Geometry, e: Error) -> Error {
    match e {
        Error::Capacity(msg) => Error::Capacity(format!("{g}: {msg}")),
        other => other,
    }
}

/// Counts keyed by the normalized set, shared across geometries.
struct CountCache<'a> {
    sft: &'a SftSpec,
    margin: &'a FiniteSet,
    limits: &'a Limits,
    counts: Mutex<HashMap<FiniteSet, UBig>>,
}

impl<'a> CountCache<'a> {
    fn new(sft: &'a SftSpec, margin: &'a FiniteSet, limits: &'a Limits) -> Self {
        CountCache {
            sft,
            margin,
            limits,
            counts: Mutex::new(HashMap::new()),
        }
    }

    fn count(&self, set: &FiniteSet) -> Result<UBig> {
        let (key, _) = set.normalized();
        if let Some(c) = self.counts.lock().expect("cache lock").get(&key) {
            return Ok(c.clone());
        }
        let c = count_language(self.sft, &key, self.margin, self.limits)?.count;
        self.counts.lock().expect("cache lock").insert(key, c.clone());
        Ok(c)
    }
}

/// The window searched for a gluing of `b1` and `b2`, and the DP over it.
fn gluing_dp(sft: &SftSpec, union: &FiniteSet, margin: &FiniteSet, limits: &Limits) -> Result<(FiniteSet, FrontierDp)> {
    let bbox = union.bounding_box();
    let ext = if sft.is_full_shift() || sft.safe_symbol().is_some() {
        bbox
    } else {
        minkowski_extend(&bbox, margin)?
    };
    if ext.len() > limits.max_cells {
        return Err(Error::Capacity(format!(
            "gluing window of {} cells, limit is {}",
            ext.len(),
            limits.max_cells
        )));
    }
    let dp = FrontierDp::new(&Compiled::new(sft, ext.points().to_vec()))?;
    Ok((ext, dp))
}

/// Tests `D`-strong irreducibility of `X` on all box pairs up to `scale`.
pub fn check_strong_irreducibility(
    sft: &SftSpec,
    shape: &MixingShape,
    scale: u64,
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<IrreducibilityVerdict> {
    validate(sft, shape, scale, margin)?;
    let geoms = geometries(shape, scale)?;
    let cache = CountCache::new(sft, margin, limits);
    let failure = if sft.is_full_shift() {
        None
    } else {
        geoms
            .par_iter()
            .find_map_first(|g| match glues(sft, g, &cache, margin, limits) {
                Ok(true) => None,
                Ok(false) => Some(Ok(g.clone())),
                Err(e) => Some(Err(with_geometry(g, e))),
            })
    };
    let witness = match failure {
        None => None,
        Some(Err(e)) => return Err(e),
        Some(Ok(g)) => Some(find_witness(sft, &g, margin, limits).map_err(|e| with_geometry(&g, e))?),
    };
    Ok(verdict(scale, geoms.len(), witness))
}

fn verdict(scale: u64, geometries_checked: usize, witness: Option<Witness>) -> IrreducibilityVerdict {
    IrreducibilityVerdict {
        status: if witness.is_some() {
            Status::Counterexample
        } else {
            Status::PassAtScale
        },
        scale,
        geometries_checked,
        witness,
    }
}

fn glues(sft: &SftSpec, g: &Geometry, cache: &CountCache<'_>, margin: &FiniteSet, limits: &Limits) -> Result<bool> {
    let (b1, b2) = (g.b1(), g.b2());
    let expected = cache.count(&b1)? * cache.count(&b2)?;
    if expected == UBig::ZERO {
        return Ok(true);
    }
    let union = b1.union(&b2)?;
    let (ext, dp) = gluing_dp(sft, &union, margin, limits)?;
    let kinds: Vec<Cell> = ext
        .iter()
        .map(|p| if union.contains(p) { Cell::Counted } else { Cell::Free })
        .collect();
    Ok(dp.count(&kinds) == expected)
}

/// Least failing pair for a geometry known to fail, in the order of the
/// two sorted languages.
fn find_witness(sft: &SftSpec, g: &Geometry, margin: &FiniteSet, limits: &Limits) -> Result<Witness> {
    let (b1, b2) = (g.b1(), g.b2());
    let l1 = enumerate_language(sft, &b1, margin, limits)?;
    let l2 = enumerate_language(sft, &b2, margin, limits)?;
    let union = b1.union(&b2)?;
    let (ext, dp) = gluing_dp(sft, &union, margin, limits)?;
    let from1: Vec<Option<usize>> = ext.iter().map(|p| b1.index_of(p)).collect();
    let from2: Vec<Option<usize>> = ext.iter().map(|p| b2.index_of(p)).collect();
    for p in l1.words() {
        for q in l2.words() {
            let kinds: Vec<Cell> = from1
                .iter()
                .zip(&from2)
                .map(|(a, b)| match (a, b) {
                    (Some(i), _) => Cell::Pinned(p[*i]),
                    (_, Some(j)) => Cell::Pinned(q[*j]),
                    _ => Cell::Free,
                })
                .collect();
            if !dp.exists(&kinds) {
                return Ok(Witness {
                    p1: Pattern::new(b1.clone(), p.clone())?,
                    p2: Pattern::new(b2.clone(), q.clone())?,
                    certified: l1.exact() && l2.exact(),
                    b1,
                    b2,
                });
            }
        }
    }
    Err(Error::Internal(format!(
        "{g} failed the count test but every pair glues"
    )))
}

/// The same test for the product system built from `H`: a pair glues when
/// the combined pattern lies in the product language on `B1 ∪ B2`.
///
/// The product language factors over cosets, so all pairs glue exactly
/// when, for every coset meeting both boxes, the projected count on the
/// union of the two pieces is the product of the piece counts.
pub fn check_product_irreducibility(
    sft: &SftSpec,
    section: &TransversalSection,
    shape: &MixingShape,
    scale: u64,
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<IrreducibilityVerdict> {
    validate(sft, shape, scale, margin)?;
    if section.basis().dim() != sft.dim() {
        return Err(Error::dim(sft.dim(), section.basis().dim()));
    }
    let geoms = geometries(shape, scale)?;
    let cache = CountCache::new(sft, margin, limits);
    let failure = geoms
        .par_iter()
        .find_map_first(|g| match product_glues(section, g, &cache) {
            Ok(true) => None,
            Ok(false) => Some(Ok(g.clone())),
            Err(e) => Some(Err(with_geometry(g, e))),
        });
    let witness = match failure {
        None => None,
        Some(Err(e)) => return Err(e),
        Some(Ok(g)) => Some(find_product_witness(sft, section, &g, margin, limits).map_err(|e| with_geometry(&g, e))?),
    };
    Ok(verdict(scale, geoms.len(), witness))
}

fn product_glues(section: &TransversalSection, g: &Geometry, cache: &CountCache<'_>) -> Result<bool> {
    let (b1, b2) = (g.b1(), g.b2());
    let union = b1.union(&b2)?;
    for piece in product_pieces(section, &union)? {
        let s: Vec<LatticePoint> = piece.part.iter().filter(|p| b1.contains(p)).cloned().collect();
        let t: Vec<LatticePoint> = piece.part.iter().filter(|p| b2.contains(p)).cloned().collect();
        if s.is_empty() || t.is_empty() {
            continue;
        }
        let s = FiniteSet::new(union.dim(), s)?;
        let t = FiniteSet::new(union.dim(), t)?;
        let expected = cache.count(&s)? * cache.count(&t)?;
        if expected != UBig::ZERO && cache.count(&piece.part)? != expected {
            return Ok(false);
        }
    }
    Ok(true)
}

fn find_product_witness(
    sft: &SftSpec,
    section: &TransversalSection,
    g: &Geometry,
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<Witness> {
    let (b1, b2) = (g.b1(), g.b2());
    let l1 = product_language(sft, section, &b1, margin, limits)?;
    let l2 = product_language(sft, section, &b2, margin, limits)?;
    let union = b1.union(&b2)?;
    // Membership in the product language is membership piece by piece.
    let pieces = product_pieces(section, &union)?
        .into_iter()
        .map(|piece| {
            let oracle = Membership::new(sft, &piece.part, margin, limits)?;
            let slots: Vec<(Option<usize>, Option<usize>)> =
                piece.part.iter().map(|p| (b1.index_of(p), b2.index_of(p))).collect();
            Ok((oracle, slots))
        })
        .collect::<Result<Vec<_>>>()?;
    let exact = language_is_exact(sft, &b1, margin) && language_is_exact(sft, &b2, margin);
    for p in l1.words() {
        for q in l2.words() {
            let inside = pieces.iter().all(|(oracle, slots)| {
                let w: Vec<_> = slots
                    .iter()
                    .map(|s| match s {
                        (Some(i), _) => p[*i],
                        (_, Some(j)) => q[*j],
                        _ => unreachable!("piece point outside both boxes"),
                    })
                    .collect();
                oracle.contains(&w)
            });
            if !inside {
                return Ok(Witness {
                    p1: Pattern::new(b1.clone(), p.clone())?,
                    p2: Pattern::new(b2.clone(), q.clone())?,
                    certified: exact && l1.exact() && l2.exact(),
                    b1,
                    b2,
                });
            }
        }
    }
    Err(Error::Internal(format!(
        "{g} failed the count test but every pair glues"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::entropy::no_margin;
    use crate::lattice::SubgroupBasis;

    fn cube(r: i64) -> MixingShape {
        MixingShape::new(FiniteSet::centered_cube(2, r)).unwrap()
    }

    #[test]
    fn shape_needs_origin() {
        let off = FiniteSet::from_coords(2, [[1, 0]]).unwrap();
        assert!(matches!(MixingShape::new(off), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn geometry_order_and_separation() {
        let g = geometries(&cube(1), 1).unwrap();
        // Offsets of sup norm at least 2 within [-2, 2]^2.
        assert_eq!(g.len(), 16);
        assert_eq!(g[0].offset, LatticePoint::from([-2, -2]));
        let point = MixingShape::new(FiniteSet::origin(2)).unwrap();
        assert_eq!(geometries(&point, 1).unwrap().len(), 24);
    }

    #[test]
    fn full_shift_passes() {
        let full = SftSpec::full_shift(2, 2).unwrap();
        let v = check_strong_irreducibility(&full, &cube(0), 3, &no_margin(2), &Limits::default()).unwrap();
        assert_eq!(v.status, Status::PassAtScale);
        assert!(v.witness.is_none());
    }

    #[test]
    fn two_fixed_points_fail_on_singletons() {
        let two = corpus::two_fixed_points();
        let v = check_strong_irreducibility(&two, &cube(1), 2, &no_margin(2), &Limits::default()).unwrap();
        assert_eq!(v.status, Status::Counterexample);
        let w = v.witness.unwrap();
        assert_eq!(w.b1.len(), 1);
        assert_eq!(w.b2.len(), 1);
        assert_eq!(w.p1.values(), &[0]);
        assert_eq!(w.p2.values(), &[1]);
        assert!(!minkowski_extend(&w.b1, cube(1).points()).unwrap().intersects(&w.b2));
    }

    #[test]
    fn hard_square_passes_small_scale() {
        let hs = corpus::hard_square();
        let v = check_strong_irreducibility(&hs, &cube(1), 2, &no_margin(2), &Limits::default()).unwrap();
        assert_eq!(v.status, Status::PassAtScale);
        // Adjacent boxes cannot always be glued.
        let v = check_strong_irreducibility(&hs, &cube(0), 1, &no_margin(2), &Limits::default()).unwrap();
        assert_eq!(v.status, Status::Counterexample);
    }

    #[test]
    fn product_check_matches_on_rows() {
        let hs = corpus::hard_square();
        let section = TransversalSection::new(&SubgroupBasis::new(2, vec![vec![1, 0]]).unwrap()).unwrap();
        let v = check_product_irreducibility(&hs, &section, &cube(1), 2, &no_margin(2), &Limits::default()).unwrap();
        assert_eq!(v.status, Status::PassAtScale);
        let v = check_product_irreducibility(&hs, &section, &cube(0), 1, &no_margin(2), &Limits::default()).unwrap();
        let w = v.witness.unwrap();
        // Horizontal neighbours: both 1.
        assert_eq!((w.p1.values(), w.p2.values()), (&[1u8][..], &[1u8][..]));
    }
}

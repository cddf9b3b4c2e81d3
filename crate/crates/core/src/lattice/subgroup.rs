//! Subgroups of `Z^d`, their quotient invariants and coset representatives.

use std::collections::BTreeMap;

use super::intmat::{hermite, smith_diagonal, IMat};
use super::{FiniteSet, LatticePoint};
use crate::error::{Error, Result};

/// Index of a subgroup in `Z^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Index {
    Finite(u64),
    Infinite,
}

/// A subgroup `H <= Z^d` given by linearly independent generating rows.
///
/// `Z^d` is abelian, so every such `H` is normal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupBasis {
    dim: usize,
    rows: Vec<Vec<i64>>,
    invariants: Vec<u64>,
    index: Index,
}

impl SubgroupBasis {
    pub fn new(dim: usize, rows: Vec<Vec<i64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidSubgroup("no generating rows".into()));
        }
        if rows.len() > dim {
            return Err(Error::InvalidSubgroup(format!(
                "{} rows cannot be independent in dimension {dim}",
                rows.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::dim(dim, r.len()));
        }
        let m = to_imat(&rows);
        if hermite(&m, dim).is_none() {
            return Err(Error::InvalidSubgroup("rows are not linearly independent".into()));
        }
        let diag = smith_diagonal(&m, dim);
        let invariants: Vec<u64> = diag.iter().filter(|&&s| s > 1).map(|&s| s as u64).collect();
        let index = if rows.len() == dim {
            Index::Finite(diag.iter().map(|&s| s as u64).product())
        } else {
            Index::Infinite
        };
        Ok(SubgroupBasis {
            dim,
            rows,
            invariants,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    pub fn index(&self) -> Index {
        self.index
    }

    /// Maps sub-coordinates `a in Z^r` to `sum_i a_i * row_i`.
    pub fn embed(&self, sub: &[i64]) -> LatticePoint {
        debug_assert_eq!(sub.len(), self.rank());
        let mut out = vec![0i64; self.dim];
        for (a, row) in sub.iter().zip(&self.rows) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += a * r;
            }
        }
        LatticePoint::new(out)
    }

    pub fn embed_set(&self, sub: &FiniteSet) -> Result<FiniteSet> {
        if sub.dim() != self.rank() {
            return Err(Error::dim(self.rank(), sub.dim()));
        }
        FiniteSet::new(self.dim, sub.iter().map(|p| self.embed(p.coords())))
    }
}

fn to_imat(rows: &[Vec<i64>]) -> IMat {
    rows.iter()
        .map(|r| r.iter().map(|&x| i128::from(x)).collect())
        .collect()
}

/// Quotient structure of `Z^d / H`: `Z^free_rank x prod Z_{s_i}`.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub invariants: Vec<u64>,
    pub free_rank: usize,
    pub index: Index,
    pub section: TransversalSection,
}

pub fn normal_form(basis: &SubgroupBasis) -> Result<NormalForm> {
    Ok(NormalForm {
        invariants: basis.invariants.clone(),
        free_rank: basis.dim - basis.rank(),
        index: basis.index,
        section: TransversalSection::new(basis)?,
    })
}

/// Choice of one representative per coset of `H`.
pub trait Transversal {
    /// The canonical section; used to identify cosets and to read off
    /// sub-coordinates.
    fn canonical(&self) -> &TransversalSection;

    /// The element of the transversal lying in the coset of `g`.
    fn representative(&self, g: &LatticePoint) -> LatticePoint;

    fn dim(&self) -> usize {
        self.canonical().basis().dim()
    }
}

/// Canonical coset representatives by Hermite-normal-form reduction: each
/// pivot coordinate is reduced into `[0, pivot)`.
#[derive(Debug, Clone)]
pub struct TransversalSection {
    basis: SubgroupBasis,
    hnf: Vec<Vec<i64>>,
    pivots: Vec<usize>,
    transform: Vec<Vec<i64>>,
}

impl TransversalSection {
    pub fn new(basis: &SubgroupBasis) -> Result<Self> {
        let h = hermite(&to_imat(basis.rows()), basis.dim())
            .ok_or_else(|| Error::InvalidSubgroup("rows are not linearly independent".into()))?;
        let narrow = |m: IMat| -> Result<Vec<Vec<i64>>> {
            m.into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|x| {
                            i64::try_from(x)
                                .map_err(|_| Error::InvalidSubgroup("normal form entries overflow i64".into()))
                        })
                        .collect()
                })
                .collect()
        };
        Ok(TransversalSection {
            basis: basis.clone(),
            hnf: narrow(h.rows)?,
            pivots: h.pivots,
            transform: narrow(h.transform)?,
        })
    }

    pub fn basis(&self) -> &SubgroupBasis {
        &self.basis
    }

    /// Reduces `g`, returning the remainder and the coefficients along the
    /// Hermite rows.
    fn reduce(&self, g: &LatticePoint) -> (Vec<i64>, Vec<i64>) {
        let mut rem = g.coords().to_vec();
        let mut coeffs = Vec::with_capacity(self.hnf.len());
        for (row, &col) in self.hnf.iter().zip(&self.pivots) {
            let q = rem[col].div_euclid(row[col]);
            if q != 0 {
                for (x, r) in rem.iter_mut().zip(row) {
                    *x -= q * r;
                }
            }
            coeffs.push(q);
        }
        (rem, coeffs)
    }

    pub fn rep(&self, g: &LatticePoint) -> LatticePoint {
        LatticePoint::new(self.reduce(g).0)
    }

    pub fn same_coset(&self, a: &LatticePoint, b: &LatticePoint) -> bool {
        self.contains(&(a - b))
    }

    pub fn contains(&self, h: &LatticePoint) -> bool {
        self.reduce(h).0.iter().all(|&x| x == 0)
    }

    /// Sub-coordinates of `h` with respect to the basis rows, when `h` lies
    /// in `H`.
    pub fn coordinates(&self, h: &LatticePoint) -> Option<Vec<i64>> {
        let (rem, coeffs) = self.reduce(h);
        if rem.iter().any(|&x| x != 0) {
            return None;
        }
        // h = coeffs . hnf = coeffs . T . rows
        let r = self.basis.rank();
        Some(
            (0..r)
                .map(|k| coeffs.iter().zip(&self.transform).map(|(c, t)| c * t[k]).sum())
                .collect(),
        )
    }

    /// Expresses a subset of `H` in sub-coordinates.
    pub fn to_sub_set(&self, points: &FiniteSet) -> Result<FiniteSet> {
        let subs = points
            .iter()
            .map(|p| {
                self.coordinates(p)
                    .map(LatticePoint::new)
                    .ok_or_else(|| Error::Internal(format!("point {p} does not lie in the subgroup")))
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteSet::new(self.basis.rank(), subs)
    }
}

impl Transversal for TransversalSection {
    fn canonical(&self) -> &TransversalSection {
        self
    }

    fn representative(&self, g: &LatticePoint) -> LatticePoint {
        self.rep(g)
    }
}

/// A transversal obtained from the canonical one by moving each
/// representative within its coset: `g -> rep(g) + embed(shift(rep(g)))`.
pub struct ShiftedTransversal<'a, F> {
    section: &'a TransversalSection,
    shift: F,
}

impl<'a, F> ShiftedTransversal<'a, F>
where
    F: Fn(&LatticePoint) -> Vec<i64>,
{
    /// `shift` receives the canonical representative and returns
    /// sub-coordinates of the displacement.
    pub fn new(section: &'a TransversalSection, shift: F) -> Self {
        ShiftedTransversal { section, shift }
    }
}

impl<F> Transversal for ShiftedTransversal<'_, F>
where
    F: Fn(&LatticePoint) -> Vec<i64>,
{
    fn canonical(&self) -> &TransversalSection {
        self.section
    }

    fn representative(&self, g: &LatticePoint) -> LatticePoint {
        let rep = self.section.rep(g);
        let delta = self.section.basis.embed(&(self.shift)(&rep));
        &rep + &delta
    }
}

/// One coset piece of a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetPart {
    /// The transversal element of this coset.
    pub rep: LatticePoint,
    pub part: FiniteSet,
}

/// Splits `window` into its intersections with cosets of `H`, sorted by
/// representative.
pub fn coset_decompose<T: Transversal + ?Sized>(window: &FiniteSet, transversal: &T) -> Result<Vec<CosetPart>> {
    if window.dim() != transversal.dim() {
        return Err(Error::dim(transversal.dim(), window.dim()));
    }
    let mut groups: BTreeMap<LatticePoint, Vec<LatticePoint>> = BTreeMap::new();
    for p in window {
        groups.entry(transversal.representative(p)).or_default().push(p.clone());
    }
    groups
        .into_iter()
        .map(|(rep, pts)| {
            Ok(CosetPart {
                rep,
                part: FiniteSet::new(window.dim(), pts)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::folner_box;

    fn basis(rows: &[&[i64]]) -> SubgroupBasis {
        let dim = rows[0].len();
        SubgroupBasis::new(dim, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn normal_form_examples() {
        let nf = normal_form(&basis(&[&[2, 0], &[0, 2]])).unwrap();
        assert_eq!(nf.invariants, vec![2, 2]);
        assert_eq!(nf.free_rank, 0);
        assert_eq!(nf.index, Index::Finite(4));

        let nf = normal_form(&basis(&[&[1, 1], &[1, -1]])).unwrap();
        assert_eq!(nf.invariants, vec![2]);
        assert_eq!(nf.free_rank, 0);
        assert_eq!(nf.index, Index::Finite(2));

        let nf = normal_form(&basis(&[&[1, 0]])).unwrap();
        assert!(nf.invariants.is_empty());
        assert_eq!(nf.free_rank, 1);
        assert_eq!(nf.index, Index::Infinite);
    }

    #[test]
    fn invalid_subgroups() {
        assert!(matches!(SubgroupBasis::new(2, vec![]), Err(Error::InvalidSubgroup(_))));
        assert!(matches!(
            SubgroupBasis::new(2, vec![vec![1, 2], vec![2, 4]]),
            Err(Error::InvalidSubgroup(_))
        ));
        assert!(matches!(
            SubgroupBasis::new(2, vec![vec![0, 0]]),
            Err(Error::InvalidSubgroup(_))
        ));
    }

    #[test]
    fn decompose_examples() {
        let f = FiniteSet::from_coords(2, [[0, 0], [1, 0], [2, 0]]).unwrap();
        let even = TransversalSection::new(&basis(&[&[2, 0], &[0, 2]])).unwrap();
        let parts = coset_decompose(&f, &even).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].rep, LatticePoint::from([0, 0]));
        assert_eq!(parts[0].part, FiniteSet::from_coords(2, [[0, 0], [2, 0]]).unwrap());
        assert_eq!(parts[1].rep, LatticePoint::from([1, 0]));
        assert_eq!(parts[1].part.len(), 1);

        let rows = TransversalSection::new(&basis(&[&[1, 0]])).unwrap();
        let parts = coset_decompose(&f, &rows).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].rep, LatticePoint::from([0, 0]));

        let sq = folner_box(&[2, 2]).unwrap();
        let parts = coset_decompose(&sq, &even).unwrap();
        assert_eq!(parts.len(), 4);
        assert!(parts.iter().all(|p| p.part.len() == 1));
    }

    #[test]
    fn decompose_dimension_mismatch() {
        let rows = TransversalSection::new(&basis(&[&[1, 0]])).unwrap();
        let f = folner_box(&[3]).unwrap();
        assert!(matches!(coset_decompose(&f, &rows), Err(Error::Dimension { .. })));
    }

    #[test]
    fn coordinates_roundtrip() {
        let b = basis(&[&[3, 1, 0], &[1, 2, 5]]);
        let s = TransversalSection::new(&b).unwrap();
        for a in [[1i64, 0], [0, 1], [-2, 7], [5, -3]] {
            let h = b.embed(&a);
            assert_eq!(s.coordinates(&h).unwrap(), a.to_vec());
            assert!(s.rep(&h).is_origin());
        }
        assert!(s.coordinates(&LatticePoint::from([1, 0, 0])).is_none());
    }

    #[test]
    fn shifted_transversal_stays_in_coset() {
        let b = basis(&[&[2, 0], &[0, 2]]);
        let s = TransversalSection::new(&b).unwrap();
        let t = ShiftedTransversal::new(&s, |rep: &LatticePoint| vec![rep.coords()[0] + 1, -1]);
        for g in folner_box(&[4, 4]).unwrap().iter() {
            let m = t.representative(g);
            assert!(s.same_coset(&m, g));
            assert_eq!(t.representative(&m), m);
        }
    }
}

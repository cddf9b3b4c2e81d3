//! Shifts of finite type over `Z^d`: alphabets, patterns, local
//! admissibility, margin languages and 1-D transfer matrices.

mod language;
pub(crate) mod search;
mod transfer;

use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::{FiniteSet, LatticePoint};

pub(crate) use language::Membership;
pub use language::{count_language, enumerate_language, language_is_exact, LanguageCount, LanguageSet, Limits};
pub use transfer::{spectral_radius, transfer_matrix_1d, word_graph_spectral_radius, SparseMatrix, TransferMatrix};

/// Symbol index into an [`Alphabet`].
pub type Symbol = u8;

/// Ordered, duplicate-free list of symbol names (at most 255).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub const MAX_SYMBOLS: usize = 255;

    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidPattern("alphabet must be nonempty".into()));
        }
        if symbols.len() > Self::MAX_SYMBOLS {
            return Err(Error::Capacity(format!(
                "alphabet has {} symbols, limit is {}",
                symbols.len(),
                Self::MAX_SYMBOLS
            )));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::InvalidPattern(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// Symbols named `"0"`, `"1"`, ... `"k-1"`.
    pub fn numeric(k: usize) -> Result<Self> {
        Self::new((0..k).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<Symbol> {
        self.symbols.iter().position(|s| s == name).map(|i| i as Symbol)
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.symbols[s as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.symbols
    }
}

/// A configuration on a finite support: one symbol per support point, in
/// the support's canonical order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    support: FiniteSet,
    values: Vec<Symbol>,
}

impl Pattern {
    pub fn new(support: FiniteSet, values: Vec<Symbol>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::InvalidPattern(format!(
                "{} values for a support of {} points",
                values.len(),
                support.len()
            )));
        }
        Ok(Pattern { support, values })
    }

    /// Builds a pattern from `(point, symbol)` pairs in any order.
    pub fn from_cells(dim: usize, cells: impl IntoIterator<Item = (LatticePoint, Symbol)>) -> Result<Self> {
        let mut cells: Vec<(LatticePoint, Symbol)> = cells.into_iter().collect();
        cells.sort_by(|a, b| a.0.cmp(&b.0));
        if cells.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidPattern("repeated cell".into()));
        }
        let values = cells.iter().map(|c| c.1).collect();
        let support = FiniteSet::new(dim, cells.into_iter().map(|c| c.0))?;
        Ok(Pattern { support, values })
    }

    /// A 1-D word placed at `0..len`.
    pub fn word(values: &[Symbol]) -> Result<Self> {
        let support = crate::lattice::folner_box(&[values.len() as u64])?;
        Self::new(support, values.to_vec())
    }

    /// A 2-D pattern given as rows listed top to bottom; `rows[0][x]` sits at
    /// `(x, rows.len() - 1)`.
    pub fn grid(rows: &[&[Symbol]]) -> Result<Self> {
        let height = rows.len() as i64;
        let cells = rows.iter().enumerate().flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(move |(x, &v)| (LatticePoint::from([x as i64, height - 1 - r as i64]), v))
        });
        Self::from_cells(2, cells)
    }

    pub fn support(&self) -> &FiniteSet {
        &self.support
    }

    pub fn values(&self) -> &[Symbol] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, p: &LatticePoint) -> Option<Symbol> {
        self.support.index_of(p).map(|i| self.values[i])
    }

    pub fn cells(&self) -> impl Iterator<Item = (&LatticePoint, Symbol)> {
        self.support.iter().zip(self.values.iter().copied())
    }

    pub fn restrict(&self, sub: &FiniteSet) -> Result<Pattern> {
        let values = sub
            .iter()
            .map(|p| {
                self.get(p)
                    .ok_or_else(|| Error::InvalidPattern(format!("{p} is outside the support")))
            })
            .collect::<Result<Vec<_>>>()?;
        Pattern::new(sub.clone(), values)
    }

    pub fn translate(&self, v: &LatticePoint) -> Pattern {
        Pattern {
            support: self.support.translate(v),
            values: self.values.clone(),
        }
    }

    /// Translated so the lexicographically least support point is the origin.
    pub fn normalized(&self) -> Pattern {
        let (support, _) = self.support.normalized();
        Pattern {
            support,
            values: self.values.clone(),
        }
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.cells()).finish()
    }
}

/// A shift of finite type: an alphabet plus forbidden patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SftSpec {
    dim: usize,
    alphabet: Alphabet,
    forbidden: Vec<Pattern>,
    window_shape: Option<FiniteSet>,
}

impl SftSpec {
    pub fn new(dim: usize, alphabet: Alphabet, forbidden: Vec<Pattern>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(forbidden.len());
        for f in &forbidden {
            if f.dim() != dim {
                return Err(Error::dim(dim, f.dim()));
            }
            if let Some(&v) = f.values().iter().find(|&&v| v as usize >= alphabet.len()) {
                return Err(Error::InvalidPattern(format!(
                    "forbidden pattern uses symbol index {v} outside the alphabet"
                )));
            }
            normalized.push(f.normalized());
        }
        normalized.sort();
        normalized.dedup();
        let window_shape = normalized
            .iter()
            .map(|f| f.support().clone())
            .reduce(|a, b| a.union(&b).expect("same dimension"));
        Ok(SftSpec {
            dim,
            alphabet,
            forbidden: normalized,
            window_shape,
        })
    }

    /// The full shift on `k` symbols.
    pub fn full_shift(dim: usize, k: usize) -> Result<Self> {
        Self::new(dim, Alphabet::numeric(k)?, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn forbidden(&self) -> &[Pattern] {
        &self.forbidden
    }

    /// Union of all normalized forbidden supports.
    pub fn window_shape(&self) -> Option<&FiniteSet> {
        self.window_shape.as_ref()
    }

    pub fn is_full_shift(&self) -> bool {
        self.forbidden.is_empty()
    }

    /// Largest extent along any axis of a forbidden support (1 when nothing
    /// is forbidden).
    pub fn interaction_diameter(&self) -> usize {
        self.axis_extents().into_iter().max().unwrap_or(1)
    }

    /// Per-axis extent of the interaction window.
    pub fn axis_extents(&self) -> Vec<usize> {
        match &self.window_shape {
            None => vec![1; self.dim],
            Some(w) => {
                let (lo, hi) = w.bounds();
                lo.coords()
                    .iter()
                    .zip(hi.coords())
                    .map(|(l, h)| (h - l + 1) as usize)
                    .collect()
            }
        }
    }

    /// Least symbol occurring in no forbidden pattern. Filling everything
    /// outside a locally admissible pattern with it yields a point of the
    /// shift, which makes every margin language exact.
    pub fn safe_symbol(&self) -> Option<Symbol> {
        (0..self.alphabet.len() as Symbol).find(|s| self.forbidden.iter().all(|f| !f.values().contains(s)))
    }

    pub(crate) fn check_pattern(&self, p: &Pattern) -> Result<()> {
        if p.dim() != self.dim {
            return Err(Error::dim(self.dim, p.dim()));
        }
        if let Some(&v) = p.values().iter().find(|&&v| v as usize >= self.alphabet.len()) {
            return Err(Error::InvalidPattern(format!(
                "symbol index {v} outside an alphabet of {}",
                self.alphabet.len()
            )));
        }
        Ok(())
    }
}

/// True iff no translate of a forbidden pattern that fits inside the
/// support of `p` matches `p`.
pub fn locally_admissible(p: &Pattern, sft: &SftSpec) -> Result<bool> {
    sft.check_pattern(p)?;
    for f in sft.forbidden() {
        let anchor = &f.support().points()[0];
        for start in p.support() {
            let shift = start - anchor;
            let hit = f.cells().all(|(q, v)| p.get(&(q + &shift)) == Some(v));
            if hit {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

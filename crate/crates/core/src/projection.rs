//! Projections onto a subgroup `H` and the product system assembled from
//! independent `H`-points, one per coset.
//!
//! `X_H` is never built as a shift space of its own; it is only queried
//! through languages on finite subsets of `H`, written in sub-coordinates
//! (`H ~ Z^r` through the basis rows).

use std::collections::BTreeMap;

use dashu::integer::UBig;
use rayon::prelude::*;

use crate::entropy::{entropy_bounds, log_count_per_site, name_window, window_label, EntropyBound, EntropyReport};
use crate::error::{Error, Result};
use crate::lattice::{
    coset_decompose, folner_box, FiniteSet, LatticePoint, SubgroupBasis, Transversal, TransversalSection,
};
use crate::shiftspace::{
    count_language, enumerate_language, language_is_exact, word_graph_spectral_radius, LanguageCount, LanguageSet,
    Limits, Membership, Pattern, SftSpec, Symbol,
};

/// A finite subset of `H` in sub-coordinates together with its embedding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectedWindow {
    pub sub_points: FiniteSet,
    /// The `r x d` basis matrix.
    pub embedding: Vec<Vec<i64>>,
}

impl ProjectedWindow {
    pub fn new(basis: &SubgroupBasis, sub_points: FiniteSet) -> Result<Self> {
        if sub_points.dim() != basis.rank() {
            return Err(Error::dim(basis.rank(), sub_points.dim()));
        }
        Ok(ProjectedWindow {
            sub_points,
            embedding: basis.rows().to_vec(),
        })
    }

    /// The window as a subset of `Z^d`.
    pub fn embedded(&self) -> FiniteSet {
        let dim = self.embedding[0].len();
        let pts = self.sub_points.iter().map(|s| {
            let mut out = vec![0i64; dim];
            for (a, row) in s.coords().iter().zip(&self.embedding) {
                for (o, r) in out.iter_mut().zip(row) {
                    *o += a * r;
                }
            }
            LatticePoint::new(out)
        });
        FiniteSet::new(dim, pts).expect("nonempty")
    }
}

fn check_margin(sft: &SftSpec, margin: &FiniteSet) -> Result<()> {
    if margin.dim() != sft.dim() {
        return Err(Error::dim(sft.dim(), margin.dim()));
    }
    Ok(())
}

/// Margin language of `X_H` on `f_sub`: the margin language of `X` on the
/// embedded window, re-indexed by sub-coordinates.
pub fn project_language(
    sft: &SftSpec,
    basis: &SubgroupBasis,
    f_sub: &FiniteSet,
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<LanguageSet> {
    check_margin(sft, margin)?;
    let pw = ProjectedWindow::new(basis, f_sub.clone())?;
    let embedded = pw.embedded();
    let lang = enumerate_language(sft, &embedded, margin, limits)?;
    let perm: Vec<usize> = f_sub
        .iter()
        .map(|s| embedded.index_of(&basis.embed(s.coords())).expect("embedded point"))
        .collect();
    let mut words: Vec<Vec<Symbol>> = lang
        .words()
        .iter()
        .map(|w| perm.iter().map(|&i| w[i]).collect())
        .collect();
    words.sort_unstable();
    Ok(LanguageSet::from_sorted(
        f_sub.clone(),
        margin.clone(),
        words,
        lang.exact(),
    ))
}

pub fn project_count(
    sft: &SftSpec,
    basis: &SubgroupBasis,
    f_sub: &FiniteSet,
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<LanguageCount> {
    check_margin(sft, margin)?;
    let embedded = ProjectedWindow::new(basis, f_sub.clone())?.embedded();
    count_language(sft, &embedded, margin, limits)
}

/// The boxes spanned by the first `rank` sides of each window.
pub fn sub_windows(windows: &[FiniteSet], rank: usize) -> Result<Vec<FiniteSet>> {
    windows
        .iter()
        .map(|w| {
            let sides = w
                .box_sides()
                .ok_or_else(|| Error::InvalidWindow("sub-windows need box windows".into()))?;
            if sides.len() < rank {
                return Err(Error::dim(rank, sides.len()));
            }
            folner_box(&sides[..rank])
        })
        .collect()
}

/// Entropy bounds for `X_H` from its projected languages.
///
/// For rank one, the longest certified-exact interval language of length
/// at least two also yields a value from its word graph; it is kept only
/// when it does not exceed the best window bound.
pub fn projectional_entropy(
    sft: &SftSpec,
    basis: &SubgroupBasis,
    windows_sub: &[FiniteSet],
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<EntropyReport> {
    if windows_sub.is_empty() {
        return Err(Error::InvalidWindow("no windows given".into()));
    }
    let bounds = windows_sub
        .par_iter()
        .map(|w| {
            let c = project_count(sft, basis, w, margin, limits).map_err(|e| name_window(w, e))?;
            if c.count == UBig::ZERO {
                return Err(Error::EmptySystem(format!(
                    "no pattern on sub-window {}",
                    window_label(w)
                )));
            }
            Ok(EntropyBound {
                window: w.clone(),
                margin: margin.clone(),
                value: log_count_per_site(&c.count, w.len()),
                count: c.count,
                certified_upper: true,
                exact: c.exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = EntropyReport::from_bounds(bounds, None);
    report.exact_value = if sft.is_full_shift() {
        Some((sft.alphabet().len() as f64).ln())
    } else if basis.rank() == 1 {
        word_graph_value(sft, basis, windows_sub, margin, limits, report.best_upper)
    } else {
        None
    };
    Ok(report)
}

fn word_graph_value(
    sft: &SftSpec,
    basis: &SubgroupBasis,
    windows_sub: &[FiniteSet],
    margin: &FiniteSet,
    limits: &Limits,
    best_upper: f64,
) -> Option<f64> {
    let mut intervals: Vec<&FiniteSet> = windows_sub
        .iter()
        .filter(|w| w.len() >= 2 && w.box_sides().is_some())
        .filter(|w| {
            let embedded = ProjectedWindow::new(basis, (*w).clone()).map(|p| p.embedded());
            embedded.is_ok_and(|e| language_is_exact(sft, &e, margin))
        })
        .collect();
    intervals.sort_by_key(|w| std::cmp::Reverse(w.len()));
    for w in intervals {
        let Ok(lang) = project_language(sft, basis, w, margin, limits) else {
            continue;
        };
        let rho = word_graph_spectral_radius(lang.words());
        if rho <= 0.0 {
            continue;
        }
        let value = rho.ln();
        return (value <= best_upper + 1e-9).then_some(value);
    }
    None
}

/// One pattern of `X_H` per coset, keyed by canonical representative and
/// written in sub-coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetFamily {
    entries: BTreeMap<LatticePoint, Pattern>,
}

impl CosetFamily {
    pub fn new(
        section: &TransversalSection,
        entries: impl IntoIterator<Item = (LatticePoint, Pattern)>,
    ) -> Result<Self> {
        let rank = section.basis().rank();
        let mut map = BTreeMap::new();
        for (rep, p) in entries {
            if section.rep(&rep) != rep {
                return Err(Error::IncompleteFamily(format!(
                    "{rep} is not a canonical representative"
                )));
            }
            if p.dim() != rank {
                return Err(Error::dim(rank, p.dim()));
            }
            map.insert(rep, p);
        }
        Ok(CosetFamily { entries: map })
    }

    pub fn entries(&self) -> &BTreeMap<LatticePoint, Pattern> {
        &self.entries
    }

    pub fn get(&self, rep: &LatticePoint) -> Option<&Pattern> {
        self.entries.get(rep)
    }
}

/// `x|_F` for the configuration assembled from `family`: writing
/// `g = h + m` with `m` the transversal element of `g`'s coset, the value
/// at `g` is the coset's pattern at the sub-coordinates of `h`.
pub fn assemble_phi<T: Transversal + ?Sized>(
    family: &CosetFamily,
    transversal: &T,
    window: &FiniteSet,
) -> Result<Pattern> {
    if window.dim() != transversal.dim() {
        return Err(Error::dim(transversal.dim(), window.dim()));
    }
    let section = transversal.canonical();
    let values = window
        .iter()
        .map(|g| {
            let pattern = family
                .get(&section.rep(g))
                .ok_or_else(|| Error::IncompleteFamily(format!("no entry for the coset of {g}")))?;
            let h = g - &transversal.representative(g);
            let sub = section
                .coordinates(&h)
                .ok_or_else(|| Error::Internal(format!("{h} is not in the subgroup")))?;
            pattern
                .get(&LatticePoint::new(sub))
                .ok_or_else(|| Error::IncompleteFamily(format!("{g} is not covered")))
        })
        .collect::<Result<Vec<_>>>()?;
    Pattern::new(window.clone(), values)
}

/// One coset piece `F_i` of a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductPiece {
    /// Transversal element `m_i` of the coset.
    pub rep: LatticePoint,
    pub part: FiniteSet,
    /// `F_i - m_i` in sub-coordinates.
    pub sub_window: FiniteSet,
    /// Indices into the window of the points of `sub_window`, in order.
    pub cells: Vec<usize>,
}

pub fn product_pieces<T: Transversal + ?Sized>(transversal: &T, window: &FiniteSet) -> Result<Vec<ProductPiece>> {
    let section = transversal.canonical();
    coset_decompose(window, transversal)?
        .into_iter()
        .map(|cp| {
            let shifted = cp.part.translate(&-&cp.rep);
            let sub_window = section.to_sub_set(&shifted)?;
            let basis = section.basis();
            let cells = sub_window
                .iter()
                .map(|s| {
                    let g = &basis.embed(s.coords()) + &cp.rep;
                    window.index_of(&g).expect("piece point")
                })
                .collect();
            Ok(ProductPiece {
                rep: cp.rep,
                part: cp.part,
                sub_window,
                cells,
            })
        })
        .collect()
}

/// Size of the product-system language on `window`: the product of the
/// projected counts of its coset pieces.
pub fn product_count<T: Transversal + Sync + ?Sized>(
    sft: &SftSpec,
    transversal: &T,
    window: &FiniteSet,
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<LanguageCount> {
    let basis = transversal.canonical().basis();
    let pieces = product_pieces(transversal, window)?;
    let counts = pieces
        .par_iter()
        .map(|p| project_count(sft, basis, &p.sub_window, margin, limits))
        .collect::<Result<Vec<_>>>()?;
    Ok(LanguageCount {
        count: counts.iter().map(|c| &c.count).product(),
        exact: counts.iter().all(|c| c.exact),
    })
}

fn piece_languages<T: Transversal + Sync + ?Sized>(
    sft: &SftSpec,
    transversal: &T,
    pieces: &[ProductPiece],
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<Vec<LanguageSet>> {
    let basis = transversal.canonical().basis();
    pieces
        .par_iter()
        .map(|p| project_language(sft, basis, &p.sub_window, margin, limits))
        .collect()
}

/// The product-system language on `window`: every combination of one
/// projected pattern per coset piece.
pub fn product_language<T: Transversal + Sync + ?Sized>(
    sft: &SftSpec,
    transversal: &T,
    window: &FiniteSet,
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<LanguageSet> {
    let pieces = product_pieces(transversal, window)?;
    let langs = piece_languages(sft, transversal, &pieces, margin, limits)?;
    let total = langs
        .iter()
        .try_fold(1usize, |acc, l| acc.checked_mul(l.len()))
        .filter(|&t| t <= limits.max_patterns)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "product language on {} exceeds {} patterns",
                window_label(window),
                limits.max_patterns
            ))
        })?;
    let mut words = Vec::with_capacity(total);
    if total > 0 {
        let mut choice = vec![0usize; langs.len()];
        let mut word = vec![0 as Symbol; window.len()];
        'outer: loop {
            for ((p, l), &c) in pieces.iter().zip(&langs).zip(&choice) {
                for (&cell, &v) in p.cells.iter().zip(&l.words()[c]) {
                    word[cell] = v;
                }
            }
            words.push(word.clone());
            for (i, c) in choice.iter_mut().enumerate().rev() {
                *c += 1;
                if *c < langs[i].len() {
                    continue 'outer;
                }
                *c = 0;
            }
            break;
        }
    }
    words.sort_unstable();
    let exact = langs.iter().all(LanguageSet::exact);
    Ok(LanguageSet::from_sorted(window.clone(), margin.clone(), words, exact))
}

/// How inclusion `L_F(X) <= L_F(product)` was established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inclusion {
    /// Every pattern of `X` was checked against the product language.
    Verified,
    /// Too many patterns to check; inclusion holds by construction.
    ByConstruction,
    /// A pattern of `X` missing from the product language.
    Violated(Pattern),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowComparison {
    pub window: FiniteSet,
    pub margin: FiniteSet,
    pub x_count: LanguageCount,
    pub product_count: LanguageCount,
    pub inclusion: Inclusion,
    /// The two margin languages coincide on this window.
    pub equal: bool,
    /// Least product pattern outside the language of `X`, when one was
    /// searched for.
    pub witness: Option<Pattern>,
    /// Strict inclusion but the product language was too large to search.
    pub witness_capped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub windows: Vec<WindowComparison>,
    pub x_entropy: EntropyReport,
    pub xh_entropy: EntropyReport,
    /// Least `ln(product count) / |F|` over the windows.
    pub product_best_upper: f64,
    /// Best estimate of `h(X_H)` minus best estimate of `h(X)`.
    pub entropy_gap: f64,
    /// Equality held on every window (at this margin only).
    pub equal_at_scale: bool,
}

/// Window-by-window comparison of `X` with the product system built from
/// `H`, using the same margin on both sides.
pub fn compare_systems(
    sft: &SftSpec,
    basis: &SubgroupBasis,
    windows: &[FiniteSet],
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<ComparisonReport> {
    if windows.is_empty() {
        return Err(Error::InvalidWindow("no windows given".into()));
    }
    let section = TransversalSection::new(basis)?;
    let per_window = windows
        .par_iter()
        .map(|w| compare_window(sft, &section, w, margin, limits).map_err(|e| name_window(w, e)))
        .collect::<Result<Vec<_>>>()?;
    let x_entropy = entropy_bounds(sft, windows, margin, limits)?;
    let xh_entropy = projectional_entropy(sft, basis, &sub_windows(windows, basis.rank())?, margin, limits)?;
    let product_best_upper = per_window
        .iter()
        .filter(|c| c.product_count.count > UBig::ZERO)
        .map(|c| log_count_per_site(&c.product_count.count, c.window.len()))
        .fold(f64::INFINITY, f64::min);
    Ok(ComparisonReport {
        entropy_gap: xh_entropy.best_estimate() - x_entropy.best_estimate(),
        equal_at_scale: per_window.iter().all(|c| c.equal),
        windows: per_window,
        x_entropy,
        xh_entropy,
        product_best_upper,
    })
}

fn compare_window(
    sft: &SftSpec,
    section: &TransversalSection,
    window: &FiniteSet,
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<WindowComparison> {
    let x_count = count_language(sft, window, margin, limits)?;
    let product_count = product_count(sft, section, window, margin, limits)?;
    let inclusion = check_inclusion(sft, section, window, margin, limits, &x_count.count)?;
    // Inclusion plus equal cardinality.
    let equal = x_count.count == product_count.count && !matches!(inclusion, Inclusion::Violated(_));
    let fits = UBig::from(limits.max_patterns) >= product_count.count;
    let witness = if equal || !fits {
        None
    } else {
        let product = product_language(sft, section, window, margin, limits)?;
        let member = Membership::new(sft, window, margin, limits)?;
        product
            .words()
            .iter()
            .find(|w| !member.contains(w))
            .map(|w| Pattern::new(window.clone(), w.clone()).expect("aligned"))
    };
    Ok(WindowComparison {
        window: window.clone(),
        margin: margin.clone(),
        witness_capped: !equal && !fits,
        x_count,
        product_count,
        inclusion,
        equal,
        witness,
    })
}

fn check_inclusion(
    sft: &SftSpec,
    section: &TransversalSection,
    window: &FiniteSet,
    margin: &FiniteSet,
    limits: &Limits,
    x_count: &UBig,
) -> Result<Inclusion> {
    if *x_count > UBig::from(limits.max_patterns) {
        return Ok(Inclusion::ByConstruction);
    }
    let pieces = product_pieces(section, window)?;
    let langs = match piece_languages(sft, section, &pieces, margin, limits) {
        Ok(l) => l,
        Err(Error::Capacity(_)) => return Ok(Inclusion::ByConstruction),
        Err(e) => return Err(e),
    };
    let x = enumerate_language(sft, window, margin, limits)?;
    for w in x.words() {
        let inside = pieces.iter().zip(&langs).all(|(p, l)| {
            let sub: Vec<Symbol> = p.cells.iter().map(|&i| w[i]).collect();
            l.contains_word(&sub)
        });
        if !inside {
            return Ok(Inclusion::Violated(Pattern::new(window.clone(), w.clone())?));
        }
    }
    Ok(Inclusion::Verified)
}

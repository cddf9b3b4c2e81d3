//! Margin languages.
//!
//! The language of a `Z^d` shift of finite type on a window is not
//! computable in general. Every query here takes a margin shape `S` and
//! returns the restrictions to `F` of locally admissible patterns on
//! `F + S`, which always contains the true language. The `exact` flag is
//! raised only when one of these rules certifies equality:
//!
//! * nothing is forbidden;
//! * some symbol occurs in no forbidden pattern (fill the outside with it);
//! * `d = 1`, `F` is an interval and `S` covers `[-k, k]` with `k` large
//!   enough that every state of the de Bruijn graph reached inside the
//!   margin can be continued forever in both directions.

use dashu::integer::UBig;

use super::search::{enumerate_words, Cell, Compiled, FrontierDp};
use super::transfer::one_d_depths;
use super::{Pattern, SftSpec, Symbol};
use crate::error::{Error, Result};
use crate::lattice::{minkowski_extend, FiniteSet};

/// Hard limits for a single enumeration or counting call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of cells in the margin-extended window.
    pub max_cells: usize,
    /// Maximum number of patterns materialized by one call.
    pub max_patterns: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_cells: 256,
            max_patterns: 1 << 20,
        }
    }
}

/// An enumerated margin language on a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageSet {
    window: FiniteSet,
    margin: FiniteSet,
    words: Vec<Vec<Symbol>>,
    exact: bool,
}

impl LanguageSet {
    /// `words` must be sorted, deduplicated and aligned with `window`.
    pub(crate) fn from_sorted(window: FiniteSet, margin: FiniteSet, words: Vec<Vec<Symbol>>, exact: bool) -> Self {
        debug_assert!(words.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(words.iter().all(|w| w.len() == window.len()));
        LanguageSet {
            window,
            margin,
            words,
            exact,
        }
    }

    pub fn window(&self) -> &FiniteSet {
        &self.window
    }

    pub fn margin(&self) -> &FiniteSet {
        &self.margin
    }

    pub fn exact(&self) -> bool {
        self.exact
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Value vectors in the window's canonical order, sorted.
    pub fn words(&self) -> &[Vec<Symbol>] {
        &self.words
    }

    pub fn contains_word(&self, w: &[Symbol]) -> bool {
        self.words.binary_search_by(|x| x.as_slice().cmp(w)).is_ok()
    }

    pub fn contains(&self, p: &Pattern) -> bool {
        p.support() == &self.window && self.contains_word(p.values())
    }

    pub fn patterns(&self) -> impl Iterator<Item = Pattern> + '_ {
        self.words
            .iter()
            .map(|w| Pattern::new(self.window.clone(), w.clone()).expect("aligned"))
    }
}

/// Size of a margin language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageCount {
    pub count: UBig,
    pub exact: bool,
}

fn validate(sft: &SftSpec, window: &FiniteSet, margin: &FiniteSet) -> Result<()> {
    if window.dim() != sft.dim() {
        return Err(Error::dim(sft.dim(), window.dim()));
    }
    if margin.dim() != sft.dim() {
        return Err(Error::dim(sft.dim(), margin.dim()));
    }
    if !margin.iter().any(|p| p.is_origin()) {
        return Err(Error::InvalidShape("margin must contain the origin".into()));
    }
    Ok(())
}

/// The window actually searched: with a safe symbol the margin adds
/// nothing, so it is dropped.
fn search_window(sft: &SftSpec, window: &FiniteSet, margin: &FiniteSet, limits: &Limits) -> Result<FiniteSet> {
    let ext = if sft.is_full_shift() || sft.safe_symbol().is_some() {
        window.clone()
    } else {
        minkowski_extend(window, margin)?
    };
    if ext.len() > limits.max_cells {
        return Err(Error::Capacity(format!(
            "window {:?} extends to {} cells, limit is {}",
            window.box_sides().unwrap_or_default(),
            ext.len(),
            limits.max_cells
        )));
    }
    Ok(ext)
}

fn is_interval(window: &FiniteSet) -> bool {
    window.dim() == 1 && window.box_sides().is_some()
}

/// Largest `k` with `[-k, k]^d` inside `margin`.
pub(crate) fn margin_radius(margin: &FiniteSet) -> i64 {
    let dim = margin.dim();
    let mut k = 0;
    loop {
        let cube = FiniteSet::centered_cube(dim, k + 1);
        if !cube.is_subset(margin) {
            return k;
        }
        k += 1;
    }
}

/// Whether the margin language of `sft` on `window` is certified equal to
/// the true language.
pub fn language_is_exact(sft: &SftSpec, window: &FiniteSet, margin: &FiniteSet) -> bool {
    if sft.is_full_shift() || sft.safe_symbol().is_some() {
        return true;
    }
    if sft.dim() == 1 && is_interval(window) {
        if let Ok(d) = one_d_depths(sft) {
            let k = margin_radius(margin);
            return k >= d.backward_need as i64 && k + 2 >= d.memory as i64 + d.forward_need as i64;
        }
    }
    false
}

/// Number of patterns in the margin language, without materializing it.
pub fn count_language(sft: &SftSpec, window: &FiniteSet, margin: &FiniteSet, limits: &Limits) -> Result<LanguageCount> {
    validate(sft, window, margin)?;
    let exact = language_is_exact(sft, window, margin);
    if sft.is_full_shift() {
        let k = UBig::from(sft.alphabet().len());
        return Ok(LanguageCount {
            count: k.pow(window.len()),
            exact,
        });
    }
    let ext = search_window(sft, window, margin, limits)?;
    let compiled = Compiled::new(sft, ext.points().to_vec());
    let dp = FrontierDp::new(&compiled)?;
    let kinds: Vec<Cell> = ext
        .iter()
        .map(|p| if window.contains(p) { Cell::Counted } else { Cell::Free })
        .collect();
    Ok(LanguageCount {
        count: dp.count(&kinds),
        exact,
    })
}

/// Restrictions to `window` of locally admissible patterns on
/// `window + margin`, sorted.
///
/// An empty result is not an error: it means the system has no locally
/// admissible pattern on the extended window.
pub fn enumerate_language(
    sft: &SftSpec,
    window: &FiniteSet,
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<LanguageSet> {
    validate(sft, window, margin)?;
    let exact = language_is_exact(sft, window, margin);
    let words = enumerate_raw(sft, window, margin, limits)?;
    Ok(LanguageSet::from_sorted(window.clone(), margin.clone(), words, exact))
}

pub(crate) fn enumerate_raw(
    sft: &SftSpec,
    window: &FiniteSet,
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<Vec<Vec<Symbol>>> {
    let inner = Compiled::new(sft, window.points().to_vec());
    let oracle = Membership::new(sft, window, margin, limits)?;
    if oracle.trivial {
        return enumerate_words(&inner, limits.max_patterns, |_| true);
    }
    enumerate_words(&inner, limits.max_patterns, |w| oracle.contains(w))
}

/// Membership test for one margin language without enumerating it.
pub(crate) struct Membership {
    dp: FrontierDp,
    /// For each cell of the extended window, its index in the window.
    slots: Vec<Option<usize>>,
    /// The extended window is the window itself.
    trivial: bool,
}

impl Membership {
    pub fn new(sft: &SftSpec, window: &FiniteSet, margin: &FiniteSet, limits: &Limits) -> Result<Self> {
        validate(sft, window, margin)?;
        let ext = search_window(sft, window, margin, limits)?;
        let dp = FrontierDp::new(&Compiled::new(sft, ext.points().to_vec()))?;
        Ok(Membership {
            dp,
            slots: ext.iter().map(|p| window.index_of(p)).collect(),
            trivial: ext.len() == window.len(),
        })
    }

    /// Whether the word (in window order) lies in the margin language.
    pub fn contains(&self, word: &[Symbol]) -> bool {
        let kinds: Vec<Cell> = self
            .slots
            .iter()
            .map(|s| match s {
                Some(i) => Cell::Pinned(word[*i]),
                None => Cell::Free,
            })
            .collect();
        self.dp.exists(&kinds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::lattice::{folner_box, LatticePoint};

    fn origin(d: usize) -> FiniteSet {
        FiniteSet::origin(d)
    }

    /// Every binary string of the given length, filtered by a predicate.
    fn brute_words(len: usize, keep: impl Fn(&[u8]) -> bool) -> Vec<Vec<u8>> {
        (0..1u32 << len)
            .map(|m| (0..len).map(|i| ((m >> (len - 1 - i)) & 1) as u8).collect::<Vec<_>>())
            .filter(|w| keep(w))
            .collect()
    }

    #[test]
    fn full_shift_box() {
        let full = SftSpec::full_shift(2, 2).unwrap();
        let b = folner_box(&[2, 2]).unwrap();
        let lang = enumerate_language(&full, &b, &origin(2), &Limits::default()).unwrap();
        assert_eq!(lang.len(), 16);
        assert!(lang.exact());
    }

    #[test]
    fn golden_mean_words_match_brute_force() {
        let gm = corpus::golden_mean();
        let b = folner_box(&[3]).unwrap();
        let lang = enumerate_language(&gm, &b, &origin(1), &Limits::default()).unwrap();
        let oracle = brute_words(3, |w| !w.windows(2).any(|p| p == [1, 1]));
        assert_eq!(lang.words(), oracle.as_slice());
        assert_eq!(lang.len(), 5);
    }

    #[test]
    fn hard_square_two_by_two() {
        let hs = corpus::hard_square();
        let b = folner_box(&[2, 2]).unwrap();
        let lang = enumerate_language(&hs, &b, &origin(2), &Limits::default()).unwrap();
        // Independent sets of the 4-cycle (0,0)-(0,1)-(1,1)-(1,0).
        let oracle = brute_words(4, |w| {
            let edges = [(0, 1), (0, 2), (1, 3), (2, 3)];
            !edges.iter().any(|&(a, b)| w[a] == 1 && w[b] == 1)
        });
        assert_eq!(lang.words(), oracle.as_slice());
        assert_eq!(lang.len(), 7);
    }

    #[test]
    fn margin_prunes_dead_ends() {
        // 2 must be followed by 3 and nothing may follow 3, so neither
        // symbol occurs in a bi-infinite point.
        let a = crate::shiftspace::Alphabet::numeric(4).unwrap();
        let fb = |x: u8, y: u8| Pattern::word(&[x, y]).unwrap();
        let mut forbidden = vec![fb(2, 0), fb(2, 1), fb(2, 2)];
        forbidden.extend((0..4).map(|y| fb(3, y)));
        let sft = SftSpec::new(1, a, forbidden).unwrap();
        let w = folner_box(&[1]).unwrap();
        let m0 = enumerate_language(&sft, &w, &origin(1), &Limits::default()).unwrap();
        assert_eq!(m0.len(), 4);
        assert!(!m0.exact());
        let m2 = FiniteSet::centered_cube(1, 2);
        let lang = enumerate_language(&sft, &w, &m2, &Limits::default()).unwrap();
        assert_eq!(lang.words(), &[vec![0], vec![1]]);
        assert!(lang.exact());
        let c = count_language(&sft, &w, &m2, &Limits::default()).unwrap();
        assert_eq!(c.count, UBig::from(2u8));
    }

    #[test]
    fn margin_is_validated() {
        let gm = corpus::golden_mean();
        let w = folner_box(&[2]).unwrap();
        let bad = FiniteSet::singleton(LatticePoint::from([1]));
        assert!(matches!(
            enumerate_language(&gm, &w, &bad, &Limits::default()),
            Err(Error::InvalidShape(_))
        ));
    }

    #[test]
    fn capacity_is_enforced() {
        let cb = corpus::checkerboard();
        let w = folner_box(&[9, 9]).unwrap();
        let m = FiniteSet::centered_cube(2, 1);
        let limits = Limits {
            max_cells: 64,
            ..Limits::default()
        };
        assert!(matches!(count_language(&cb, &w, &m, &limits), Err(Error::Capacity(_))));
    }

    #[test]
    fn checkerboard_languages() {
        let cb = corpus::checkerboard();
        let m1 = FiniteSet::centered_cube(2, 1);
        for n in 1..=4 {
            let b = folner_box(&[n, n]).unwrap();
            let c = count_language(&cb, &b, &m1, &Limits::default()).unwrap();
            assert_eq!(c.count, UBig::from(2u8));
            let lang = enumerate_language(&cb, &b, &m1, &Limits::default()).unwrap();
            assert_eq!(lang.len(), 2);
        }
    }

    #[test]
    fn empty_system_gives_empty_language() {
        let a = crate::shiftspace::Alphabet::numeric(2).unwrap();
        let forbidden = vec![Pattern::word(&[0]).unwrap(), Pattern::word(&[1]).unwrap()];
        let sft = SftSpec::new(1, a, forbidden).unwrap();
        let w = folner_box(&[3]).unwrap();
        let lang = enumerate_language(&sft, &w, &origin(1), &Limits::default()).unwrap();
        assert!(lang.is_empty());
        let c = count_language(&sft, &w, &origin(1), &Limits::default()).unwrap();
        assert_eq!(c.count, UBig::ZERO);
    }
}

//! Enumeration kernels over a finite window.
//!
//! A window is compiled once into a cell order plus the forbidden-pattern
//! translates that fit inside it, each anchored at its last cell in that
//! order. Two engines run on the compiled form:
//!
//! * [`FrontierDp`] sweeps the cells in order keeping, per distinct
//!   assignment of the *counted* cells seen so far, the set of still
//!   consistent values on the frontier (processed cells that share a
//!   constraint with an unprocessed cell). Free cells are quantified
//!   existentially, pinned cells take one value. The result is the number
//!   of counted assignments that extend to a locally admissible pattern on
//!   the whole window; with no counted cells it is an existence test.
//! * [`enumerate_words`] is a plain depth-first backtracker with forward
//!   checking, used when the patterns themselves are needed.

use std::collections::HashMap;

use dashu::integer::UBig;
use rayon::prelude::*;

use super::{SftSpec, Symbol};
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub cells: Vec<usize>,
    pub values: Vec<Symbol>,
}

/// Cells of a window in processing order with anchored constraints.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub cells: Vec<LatticePoint>,
    /// `anchored[k]` holds the constraints whose last cell is `k`.
    pub anchored: Vec<Vec<Constraint>>,
    pub symbols: usize,
}

impl Compiled {
    pub fn new(sft: &SftSpec, cells: Vec<LatticePoint>) -> Self {
        let position: HashMap<&LatticePoint, usize> = cells.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut anchored: Vec<Vec<Constraint>> = vec![Vec::new(); cells.len()];
        for f in sft.forbidden() {
            let first = &f.support().points()[0];
            for start in &cells {
                let shift = start - first;
                let placed: Option<Vec<usize>> = f
                    .support()
                    .iter()
                    .map(|q| position.get(&(q + &shift)).copied())
                    .collect();
                if let Some(idx) = placed {
                    let last = *idx.iter().max().expect("nonempty support");
                    anchored[last].push(Constraint {
                        cells: idx,
                        values: f.values().to_vec(),
                    });
                }
            }
        }
        Compiled {
            cells,
            anchored,
            symbols: sft.alphabet().len(),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    /// Whether the constraints anchored at `k` are all avoided by `values`
    /// (cells up to `k` must be assigned).
    #[inline]
    fn ok_at(&self, k: usize, values: &[Symbol]) -> bool {
        self.anchored[k]
            .iter()
            .all(|c| c.cells.iter().zip(&c.values).any(|(&i, &v)| values[i] != v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Cell {
    Counted,
    Free,
    Pinned(Symbol),
}

#[derive(Debug, Clone, Copy)]
enum Src {
    Prev(usize),
    Cur,
}

#[derive(Debug)]
struct Step {
    checks: Vec<Vec<(Src, Symbol)>>,
    project: Vec<Src>,
}

type Tuple = u128;

pub(crate) struct FrontierDp {
    steps: Vec<Step>,
    bits: u32,
    symbols: usize,
}

impl FrontierDp {
    pub fn new(c: &Compiled) -> Result<Self> {
        let n = c.len();
        let bits = usize::BITS - (c.symbols.max(2) - 1).leading_zeros();
        let mut last_use: Vec<usize> = (0..n).collect();
        for (k, cons) in c.anchored.iter().enumerate() {
            for con in cons {
                for &i in &con.cells {
                    last_use[i] = last_use[i].max(k);
                }
            }
        }
        let mut steps = Vec::with_capacity(n);
        let mut prev: Vec<usize> = Vec::new();
        for k in 0..n {
            let next: Vec<usize> = prev
                .iter()
                .copied()
                .chain(std::iter::once(k))
                .filter(|&i| last_use[i] > k)
                .collect();
            if next.len() as u32 * bits > Tuple::BITS {
                return Err(Error::Capacity(format!(
                    "search frontier of {} cells at {} exceeds {} bits",
                    next.len(),
                    c.cells[k],
                    Tuple::BITS
                )));
            }
            let src = |i: usize| -> Src {
                if i == k {
                    Src::Cur
                } else {
                    Src::Prev(prev.binary_search(&i).expect("cell on frontier"))
                }
            };
            let checks = c.anchored[k]
                .iter()
                .map(|con| con.cells.iter().zip(&con.values).map(|(&i, &v)| (src(i), v)).collect())
                .collect();
            let project = next.iter().map(|&i| src(i)).collect();
            steps.push(Step { checks, project });
            prev = next;
        }
        Ok(FrontierDp {
            steps,
            bits,
            symbols: c.symbols,
        })
    }

    #[inline]
    fn get(&self, t: Tuple, s: Src, cur: Symbol) -> Symbol {
        match s {
            Src::Cur => cur,
            Src::Prev(i) => ((t >> (i as u32 * self.bits)) & ((1 << self.bits) - 1)) as Symbol,
        }
    }

    fn advance(&self, k: usize, state: &[Tuple], a: Symbol, out: &mut Vec<Tuple>) {
        let step = &self.steps[k];
        for &t in state {
            let violated = step
                .checks
                .iter()
                .any(|chk| chk.iter().all(|&(s, v)| self.get(t, s, a) == v));
            if violated {
                continue;
            }
            let mut nt: Tuple = 0;
            for (j, &s) in step.project.iter().enumerate() {
                nt |= Tuple::from(self.get(t, s, a)) << (j as u32 * self.bits);
            }
            out.push(nt);
        }
    }

    /// Number of assignments to the counted cells that extend to a locally
    /// admissible pattern on the window.
    pub fn count(&self, kinds: &[Cell]) -> UBig {
        debug_assert_eq!(kinds.len(), self.steps.len());
        let mut layer: HashMap<Vec<Tuple>, UBig> = HashMap::new();
        layer.insert(vec![0], UBig::ONE);
        let mut buf = Vec::new();
        for (k, kind) in kinds.iter().enumerate() {
            let mut next: HashMap<Vec<Tuple>, UBig> = HashMap::with_capacity(layer.len());
            for (state, n) in layer {
                match *kind {
                    Cell::Counted => {
                        for a in 0..self.symbols as Symbol {
                            buf.clear();
                            self.advance(k, &state, a, &mut buf);
                            if !buf.is_empty() {
                                buf.sort_unstable();
                                buf.dedup();
                                *next.entry(buf.clone()).or_default() += &n;
                            }
                        }
                    }
                    Cell::Free | Cell::Pinned(_) => {
                        buf.clear();
                        match *kind {
                            Cell::Pinned(a) => self.advance(k, &state, a, &mut buf),
                            _ => {
                                for a in 0..self.symbols as Symbol {
                                    self.advance(k, &state, a, &mut buf);
                                }
                            }
                        }
                        if !buf.is_empty() {
                            buf.sort_unstable();
                            buf.dedup();
                            *next.entry(buf.clone()).or_default() += n;
                        }
                    }
                }
            }
            if next.is_empty() {
                return UBig::ZERO;
            }
            layer = next;
        }
        layer.into_values().sum()
    }

    pub fn exists(&self, kinds: &[Cell]) -> bool {
        self.count(kinds) > UBig::ZERO
    }
}

/// All locally admissible assignments of `c` (constraints inside the
/// window only) accepted by `accept`, in lexicographic order of the value
/// vectors. Fails once more than `limit` words have been collected.
pub(crate) fn enumerate_words<A>(c: &Compiled, limit: usize, accept: A) -> Result<Vec<Vec<Symbol>>>
where
    A: Fn(&[Symbol]) -> bool + Sync,
{
    let n = c.len();
    if n == 0 {
        return Ok(vec![Vec::new()]);
    }
    // Split the tree on the first cell; branches are concatenated in symbol
    // order so the output does not depend on scheduling.
    let branches: Vec<Result<Vec<Vec<Symbol>>>> = (0..c.symbols as Symbol)
        .into_par_iter()
        .map(|first| {
            let mut values = vec![0; n];
            values[0] = first;
            let mut out = Vec::new();
            if c.ok_at(0, &values) {
                dfs(c, 1, &mut values, &mut out, limit, &accept)?;
            }
            Ok(out)
        })
        .collect();
    let mut words = Vec::new();
    for b in branches {
        words.extend(b?);
        if words.len() > limit {
            return Err(too_many(limit));
        }
    }
    Ok(words)
}

fn too_many(limit: usize) -> Error {
    Error::Capacity(format!("more than {limit} patterns"))
}

fn dfs<A>(
    c: &Compiled,
    k: usize,
    values: &mut Vec<Symbol>,
    out: &mut Vec<Vec<Symbol>>,
    limit: usize,
    accept: &A,
) -> Result<()>
where
    A: Fn(&[Symbol]) -> bool,
{
    if k == values.len() {
        if accept(values) {
            out.push(values.clone());
            if out.len() > limit {
                return Err(too_many(limit));
            }
        }
        return Ok(());
    }
    for a in 0..c.symbols as Symbol {
        values[k] = a;
        if c.ok_at(k, values) {
            dfs(c, k + 1, values, out, limit, accept)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::lattice::folner_box;

    #[test]
    fn dp_counts_independent_sets() {
        // Independent sets of the n x n grid graph: 2, 7, 63, 1234.
        let hs = corpus::hard_square();
        for (n, want) in [(1u64, 2u32), (2, 7), (3, 63), (4, 1234)] {
            let b = folner_box(&[n, n]).unwrap();
            let c = Compiled::new(&hs, b.points().to_vec());
            let dp = FrontierDp::new(&c).unwrap();
            assert_eq!(dp.count(&vec![Cell::Counted; c.len()]), UBig::from(want));
            let words = enumerate_words(&c, 1 << 20, |_| true).unwrap();
            assert_eq!(words.len(), want as usize);
        }
    }

    #[test]
    fn dp_existence_with_pins() {
        let two = corpus::two_fixed_points();
        let b = folner_box(&[3, 1]).unwrap();
        let c = Compiled::new(&two, b.points().to_vec());
        let dp = FrontierDp::new(&c).unwrap();
        let kinds = |a, b| vec![Cell::Pinned(a), Cell::Free, Cell::Pinned(b)];
        assert!(dp.exists(&kinds(0, 0)));
        assert!(dp.exists(&kinds(1, 1)));
        assert!(!dp.exists(&kinds(0, 1)));
    }

    #[test]
    fn enumeration_limit() {
        let full = SftSpec::full_shift(1, 2).unwrap();
        let b = folner_box(&[5]).unwrap();
        let c = Compiled::new(&full, b.points().to_vec());
        assert!(matches!(enumerate_words(&c, 31, |_| true), Err(Error::Capacity(_))));
        assert_eq!(enumerate_words(&c, 32, |_| true).unwrap().len(), 32);
    }
}

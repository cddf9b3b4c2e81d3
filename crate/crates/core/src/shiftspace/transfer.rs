//! Transfer matrices and spectral radii.

use std::collections::HashMap;

use super::search::{enumerate_words, Compiled};
use super::{Pattern, SftSpec, Symbol};
use crate::error::{Error, Result};
use crate::lattice::folner_box;

/// Nonnegative matrix stored as adjacency lists.
#[derive(Debug, Clone, Default)]
pub struct SparseMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(n: usize) -> Self {
        SparseMatrix {
            rows: vec![Vec::new(); n],
        }
    }

    pub fn from_dense(m: &[Vec<u64>]) -> Self {
        let mut s = SparseMatrix::new(m.len());
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > 0 {
                    s.rows[i].push((j, v as f64));
                }
            }
        }
        s
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if let Some(e) = self.rows[i].iter_mut().find(|e| e.0 == j) {
            e.1 += v;
        } else {
            self.rows[i].push((j, v));
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i].iter().map(|e| e.0)
    }
}

/// Strongly connected components (iterative Tarjan), in reverse
/// topological order.
fn components(m: &SparseMatrix) -> Vec<Vec<usize>> {
    let n = m.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&(v, next)) = call.last() {
            if let Some(&(w, _)) = m.rows[v].get(next) {
                call.last_mut().expect("nonempty").1 += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

fn is_cyclic(m: &SparseMatrix, comp: &[usize]) -> bool {
    comp.len() > 1 || m.successors(comp[0]).any(|j| j == comp[0])
}

const RELATIVE_TOL: f64 = 1e-13;
const MAX_ITERATIONS: usize = 1_000_000;

/// Perron root of an irreducible block, by power iteration on `B + I`
/// bracketed with Collatz–Wielandt bounds.
fn perron_root(m: &SparseMatrix, comp: &[usize]) -> f64 {
    let local: HashMap<usize, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let rows: Vec<Vec<(usize, f64)>> = comp
        .iter()
        .map(|&v| {
            m.rows[v]
                .iter()
                .filter_map(|&(j, w)| local.get(&j).map(|&lj| (lj, w)))
                .collect()
        })
        .collect();
    let n = comp.len();
    let mut x = vec![1.0f64; n];
    let mut y = vec![0.0f64; n];
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for _ in 0..MAX_ITERATIONS {
        for (i, row) in rows.iter().enumerate() {
            y[i] = x[i] + row.iter().map(|&(j, w)| w * x[j]).sum::<f64>();
        }
        lo = f64::INFINITY;
        hi = 0.0;
        for i in 0..n {
            let r = y[i] / x[i];
            lo = f64::min(lo, r);
            hi = f64::max(hi, r);
        }
        if hi - lo <= RELATIVE_TOL * hi {
            break;
        }
        let top = y.iter().cloned().fold(0.0, f64::max);
        for i in 0..n {
            x[i] = y[i] / top;
        }
    }
    0.5 * (lo + hi) - 1.0
}

/// Spectral radius of a nonnegative matrix: the largest Perron root over
/// its irreducible diagonal blocks.
pub fn spectral_radius(m: &SparseMatrix) -> f64 {
    components(m)
        .iter()
        .filter(|c| is_cyclic(m, c))
        .map(|c| perron_root(m, c))
        .fold(0.0, f64::max)
}

/// De Bruijn transfer matrix of a 1-D shift of finite type.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    /// Locally admissible words of length `memory - 1`, sorted.
    pub states: Vec<Vec<Symbol>>,
    /// `matrix[u][v]` counts the admissible one-symbol extensions of `u`
    /// whose last `memory - 1` symbols are `v`.
    pub matrix: Vec<Vec<u64>>,
    pub spectral_radius: f64,
    /// Interaction diameter `L`.
    pub memory: usize,
}

impl TransferMatrix {
    /// Number of locally admissible words of length `n >= memory - 1`:
    /// the entry sum of `matrix^(n - memory + 1)`.
    pub fn word_count(&self, n: usize) -> Option<u128> {
        let steps = (n + 1).checked_sub(self.memory)?;
        let mut v: Vec<u128> = vec![1; self.states.len()];
        for _ in 0..steps {
            v = self
                .matrix
                .iter()
                .map(|row| row.iter().zip(&v).map(|(&a, &b)| u128::from(a) * b).sum())
                .collect();
        }
        Some(v.iter().sum())
    }
}

pub fn transfer_matrix_1d(sft: &SftSpec) -> Result<TransferMatrix> {
    if sft.dim() != 1 {
        return Err(Error::dim(1, sft.dim()));
    }
    let memory = sft.interaction_diameter();
    let k = sft.alphabet().len();
    let states: Vec<Vec<Symbol>> = if memory == 1 {
        vec![Vec::new()]
    } else {
        let w = folner_box(&[memory as u64 - 1])?;
        enumerate_words(&Compiled::new(sft, w.points().to_vec()), 1 << 20, |_| true)?
    };
    let index: HashMap<&[Symbol], usize> = states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let mut matrix = vec![vec![0u64; states.len()]; states.len()];
    for (i, u) in states.iter().enumerate() {
        for a in 0..k as Symbol {
            let mut w = u.clone();
            w.push(a);
            if !super::locally_admissible(&Pattern::word(&w)?, sft)? {
                continue;
            }
            if let Some(&j) = index.get(&w[1..]) {
                matrix[i][j] += 1;
            }
        }
    }
    let spectral_radius = spectral_radius(&SparseMatrix::from_dense(&matrix));
    Ok(TransferMatrix {
        states,
        matrix,
        spectral_radius,
        memory,
    })
}

/// Spectral radius of the graph whose edges are the given words (all of
/// one length `k`) and whose vertices are their length `k - 1` prefixes and
/// suffixes.
pub fn word_graph_spectral_radius(words: &[Vec<Symbol>]) -> f64 {
    let Some(first) = words.first() else {
        return 0.0;
    };
    if first.len() <= 1 {
        return words.len() as f64;
    }
    let mut ids: HashMap<&[Symbol], usize> = HashMap::new();
    for w in words {
        let n = ids.len();
        ids.entry(&w[..w.len() - 1]).or_insert(n);
        let n = ids.len();
        ids.entry(&w[1..]).or_insert(n);
    }
    let mut m = SparseMatrix::new(ids.len());
    for w in words {
        m.add(ids[&w[..w.len() - 1]], ids[&w[1..]], 1.0);
    }
    spectral_radius(&m)
}

/// How far a 1-D locally admissible word must extend before its states
/// are guaranteed to continue forever.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Depths {
    pub memory: usize,
    /// Any state with a forward path of this many steps reaches a cycle.
    pub forward_need: usize,
    pub backward_need: usize,
}

pub(crate) fn one_d_depths(sft: &SftSpec) -> Result<Depths> {
    let tm = transfer_matrix_1d(sft)?;
    let fwd = SparseMatrix::from_dense(&tm.matrix);
    let n = fwd.len();
    let mut bwd = SparseMatrix::new(n);
    for i in 0..n {
        for j in fwd.successors(i).collect::<Vec<_>>() {
            bwd.add(j, i, 1.0);
        }
    }
    Ok(Depths {
        memory: tm.memory,
        forward_need: need(&fwd),
        backward_need: need(&bwd),
    })
}

/// One more than the longest path starting at a vertex that cannot reach
/// a cycle; zero when every vertex reaches one.
fn need(m: &SparseMatrix) -> usize {
    let comps = components(m);
    let n = m.len();
    // Reverse topological order: successors' components come first.
    let mut reaches = vec![false; n];
    let mut longest = vec![0usize; n];
    let mut worst: Option<usize> = None;
    for comp in &comps {
        let cyclic = is_cyclic(m, comp);
        let v = comp[0];
        let r = cyclic || m.successors(v).any(|w| reaches[w]);
        if r {
            for &u in comp {
                reaches[u] = true;
            }
        } else {
            // Acyclic singleton.
            longest[v] = m.successors(v).map(|w| longest[w] + 1).max().unwrap_or(0);
            worst = Some(worst.map_or(longest[v], |x| x.max(longest[v])));
        }
    }
    worst.map_or(0, |w| w + 1)
}

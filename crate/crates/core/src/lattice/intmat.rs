//! Small dense integer matrices: row-style Hermite normal form with the
//! unimodular transform, and Smith normal form diagonals.
//!
//! Matrices here are a handful of rows of a handful of columns, so plain
//! `Vec<Vec<i128>>` with cofactor-free elimination is plenty.

pub(crate) type IMat = Vec<Vec<i128>>;

/// Hermite normal form of a full-row-rank matrix.
pub(crate) struct Hermite {
    /// Echelon rows, pivot positive, entries above each pivot in `[0, pivot)`.
    pub rows: IMat,
    pub pivots: Vec<usize>,
    /// `rows = transform * input`, `transform` unimodular.
    pub transform: IMat,
}

fn identity(n: usize) -> IMat {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

fn axpy(target: &mut [i128], q: i128, source: &[i128]) {
    for (t, s) in target.iter_mut().zip(source) {
        *t -= q * s;
    }
}

/// Returns `None` when the rows are linearly dependent.
pub(crate) fn hermite(input: &IMat, cols: usize) -> Option<Hermite> {
    let r = input.len();
    let mut a = input.clone();
    let mut u = identity(r);
    let mut pivots = Vec::with_capacity(r);
    let mut prow = 0;

    for col in 0..cols {
        if prow == r {
            break;
        }
        loop {
            // Smallest nonzero magnitude at or below the pivot row.
            let best = (prow..r).filter(|&i| a[i][col] != 0).min_by_key(|&i| a[i][col].abs());
            let Some(best) = best else { break };
            a.swap(prow, best);
            u.swap(prow, best);
            let mut clean = true;
            for i in prow + 1..r {
                if a[i][col] != 0 {
                    let q = a[i][col] / a[prow][col];
                    let (src_a, src_u) = (a[prow].clone(), u[prow].clone());
                    axpy(&mut a[i], q, &src_a);
                    axpy(&mut u[i], q, &src_u);
                    if a[i][col] != 0 {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if a[prow][col] != 0 {
            if a[prow][col] < 0 {
                a[prow].iter_mut().for_each(|x| *x = -*x);
                u[prow].iter_mut().for_each(|x| *x = -*x);
            }
            pivots.push(col);
            prow += 1;
        }
    }
    if prow < r {
        return None;
    }
    for (i, &col) in pivots.iter().enumerate() {
        let p = a[i][col];
        for j in 0..i {
            let q = a[j][col].div_euclid(p);
            if q != 0 {
                let (src_a, src_u) = (a[i].clone(), u[i].clone());
                axpy(&mut a[j], q, &src_a);
                axpy(&mut u[j], q, &src_u);
            }
        }
    }
    Some(Hermite {
        rows: a,
        pivots,
        transform: u,
    })
}

/// Diagonal of the Smith normal form (nonzero entries only, each dividing
/// the next).
pub(crate) fn smith_diagonal(input: &IMat, cols: usize) -> Vec<i128> {
    let mut a = input.clone();
    let rows = a.len();
    let n = rows.min(cols);
    let mut diag = Vec::new();

    for t in 0..n {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return diag;
            };
            a.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            let p = a[t][t];
            let mut done = true;
            for i in t + 1..rows {
                let q = a[i][t] / p;
                let src = a[t].clone();
                axpy(&mut a[i], q, &src);
                if a[i][t] != 0 {
                    done = false;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j] / p;
                for row in a.iter_mut() {
                    let v = row[t];
                    row[j] -= q * v;
                }
                if a[t][j] != 0 {
                    done = false;
                }
            }
            if !done {
                continue;
            }
            // Divisibility: fold any offending row into the pivot row.
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| a[i][j] % p != 0));
            match offender {
                Some(i) => {
                    let src = a[i].clone();
                    axpy(&mut a[t], -1, &src);
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
    }
    diag
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smith_small() {
        assert_eq!(smith_diagonal(&vec![vec![2, 0], vec![0, 2]], 2), vec![2, 2]);
        assert_eq!(smith_diagonal(&vec![vec![1, 1], vec![1, -1]], 2), vec![1, 2]);
        assert_eq!(smith_diagonal(&vec![vec![2, 0], vec![0, 3]], 2), vec![1, 6]);
        assert_eq!(smith_diagonal(&vec![vec![4, 6]], 2), vec![2]);
    }

    #[test]
    fn hermite_transform_holds() {
        let m: IMat = vec![vec![3, 5, 1], vec![2, 4, 7]];
        let h = hermite(&m, 3).unwrap();
        for i in 0..2 {
            for (c, &expected) in h.rows[i].iter().enumerate() {
                let v: i128 = (0..2).map(|k| h.transform[i][k] * m[k][c]).sum();
                assert_eq!(v, expected);
            }
        }
        assert!(h.pivots.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn hermite_rank_deficient() {
        assert!(hermite(&vec![vec![1, 2], vec![2, 4]], 2).is_none());
    }
}

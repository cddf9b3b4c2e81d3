//! Entropy upper bounds from window counts, exact 1-D values and strip
//! transfer-matrix bounds for nearest-neighbour 2-D systems.
//!
//! All values are in nats. For any finite window `F`,
//! `ln |L_F(X)| / |F| >= h(X)`, and a margin language only adds patterns,
//! so every bound reported here is a certified upper bound.

use std::collections::HashMap;

use dashu::float::round::mode::HalfEven;
use dashu::float::FBig;
use dashu::integer::UBig;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{folner_box, FiniteSet, LatticePoint};
use crate::shiftspace::search::{enumerate_words, Compiled};
use crate::shiftspace::{count_language, spectral_radius, transfer_matrix_1d, Limits, SftSpec, SparseMatrix, Symbol};

/// Working precision, in bits, of the logarithms behind every value.
const LOG_PRECISION: usize = 192;

/// Largest strip width accepted by [`strip_bounds_2d`].
pub const MAX_STRIP_WIDTH: usize = 12;

/// `ln(count) / sites`, evaluated in extended precision and rounded once.
///
/// Rounding only at the end makes `ln(c^n) / (n m)` and `ln(c) / m` agree
/// to the last bit.
pub fn log_count_per_site(count: &UBig, sites: usize) -> f64 {
    assert!(*count > UBig::ZERO, "logarithm of an empty count");
    assert!(sites > 0, "empty window");
    let c = FBig::<HalfEven>::from(count.clone())
        .with_precision(LOG_PRECISION)
        .value();
    let n = FBig::<HalfEven>::from(sites as u64)
        .with_precision(LOG_PRECISION)
        .value();
    (c.ln() / n).to_f64().value()
}

/// One window's contribution to an entropy estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyBound {
    pub window: FiniteSet,
    pub margin: FiniteSet,
    /// Size of the margin language on `window`.
    pub count: UBig,
    /// `ln(count) / |window|`.
    pub value: f64,
    /// Always true: window counts over-approximate the entropy.
    pub certified_upper: bool,
    /// Whether `count` is the size of the true language rather than of a
    /// superset.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub bounds: Vec<EntropyBound>,
    /// Least of the window values.
    pub best_upper: f64,
    /// Present for `d = 1` and for full shifts.
    pub exact_value: Option<f64>,
}

impl EntropyReport {
    pub const LOG_BASE: &'static str = "natural";

    pub(crate) fn from_bounds(bounds: Vec<EntropyBound>, exact_value: Option<f64>) -> Self {
        let best_upper = bounds.iter().map(|b| b.value).fold(f64::INFINITY, f64::min);
        EntropyReport {
            bounds,
            best_upper,
            exact_value,
        }
    }

    /// Exact value when known, else the best upper bound.
    pub fn best_estimate(&self) -> f64 {
        self.exact_value.unwrap_or(self.best_upper)
    }
}

pub(crate) fn window_label(window: &FiniteSet) -> String {
    match window.box_sides() {
        Some(sides) => sides.iter().map(u64::to_string).collect::<Vec<_>>().join("x"),
        None => format!("{} cells", window.len()),
    }
}

pub(crate) fn name_window(window: &FiniteSet, e: Error) -> Error {
    match e {
        Error::Capacity(msg) => Error::Capacity(format!("window {}: {msg}", window_label(window))),
        other => other,
    }
}

/// One upper bound per window, in window order.
pub fn entropy_bounds(
    sft: &SftSpec,
    windows: &[FiniteSet],
    margin: &FiniteSet,
    limits: &Limits,
) -> Result<EntropyReport> {
    if windows.is_empty() {
        return Err(Error::InvalidWindow("no windows given".into()));
    }
    let bounds = windows
        .par_iter()
        .map(|w| {
            let c = count_language(sft, w, margin, limits).map_err(|e| name_window(w, e))?;
            if c.count == UBig::ZERO {
                return Err(Error::EmptySystem(format!("no pattern on window {}", window_label(w))));
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
    let exact_value = if sft.is_full_shift() {
        Some((sft.alphabet().len() as f64).ln())
    } else if sft.dim() == 1 {
        Some(entropy_exact_1d(sft)?)
    } else {
        None
    };
    Ok(EntropyReport::from_bounds(bounds, exact_value))
}

/// `ln` of the spectral radius of the 1-D transfer matrix.
pub fn entropy_exact_1d(sft: &SftSpec) -> Result<f64> {
    let t = transfer_matrix_1d(sft)?;
    if t.spectral_radius <= 0.0 {
        return Err(Error::EmptySystem("transfer matrix has no cycle".into()));
    }
    Ok(t.spectral_radius.ln())
}

/// Strip bounds `ln(lambda_m) / m` for a nearest-neighbour 2-D system,
/// where `lambda_m` is the spectral radius of the transfer matrix between
/// admissible columns of height `m`.
pub fn strip_bounds_2d(sft: &SftSpec, widths: &[usize], limits: &Limits) -> Result<Vec<(usize, f64)>> {
    if sft.dim() != 2 {
        return Err(Error::dim(2, sft.dim()));
    }
    if sft.axis_extents().iter().any(|&e| e > 2) {
        return Err(Error::UnsupportedInteraction(
            "strip bounds need forbidden patterns inside a 2x2 box".into(),
        ));
    }
    if let Some(&m) = widths.iter().find(|&&m| m == 0 || m > MAX_STRIP_WIDTH) {
        return Err(Error::InvalidWindow(format!(
            "strip width {m} outside 1..={MAX_STRIP_WIDTH}"
        )));
    }
    widths
        .par_iter()
        .map(|&m| {
            if sft.is_full_shift() {
                return Ok((m, (sft.alphabet().len() as f64).ln()));
            }
            let rho = column_radius(sft, m, limits)?;
            if rho <= 0.0 {
                return Err(Error::EmptySystem(format!("no bi-infinite strip of width {m}")));
            }
            Ok((m, rho.ln() / m as f64))
        })
        .collect()
}

fn column_radius(sft: &SftSpec, m: usize, limits: &Limits) -> Result<f64> {
    // Cells of a 2 x m block in box order: the left column, then the right.
    let block = folner_box(&[2, m as u64])?;
    let compiled = Compiled::new(sft, block.points().to_vec());
    let pairs = enumerate_words(&compiled, limits.max_patterns, |_| true).map_err(|e| name_window(&block, e))?;
    let mut index: HashMap<&[Symbol], usize> = HashMap::new();
    let mut edges = Vec::with_capacity(pairs.len());
    for w in &pairs {
        let (left, right) = w.split_at(m);
        let n = index.len();
        let i = *index.entry(left).or_insert(n);
        let n = index.len();
        let j = *index.entry(right).or_insert(n);
        edges.push((i, j));
    }
    let mut t = SparseMatrix::new(index.len());
    for (i, j) in edges {
        t.add(i, j, 1.0);
    }
    Ok(spectral_radius(&t))
}

/// Boxes `n x ... x n` for `n = 1..=max_side`.
pub fn cube_ladder(dim: usize, max_side: u64) -> Result<Vec<FiniteSet>> {
    (1..=max_side).map(|n| folner_box(&vec![n; dim])).collect()
}

/// Origin-only margin in dimension `dim`.
pub fn no_margin(dim: usize) -> FiniteSet {
    FiniteSet::singleton(LatticePoint::origin(dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn full_shift_bounds_are_ln_k() {
        let full = SftSpec::full_shift(2, 2).unwrap();
        let wins = cube_ladder(2, 6).unwrap();
        let r = entropy_bounds(&full, &wins, &no_margin(2), &Limits::default()).unwrap();
        for b in &r.bounds {
            assert!(close(b.value, 2f64.ln(), 1e-12));
            assert!(b.exact);
        }
        assert_eq!(r.exact_value, Some(2f64.ln()));
    }

    #[test]
    fn golden_mean_rows_fibonacci() {
        let sys = corpus::golden_mean_rows();
        let wins = vec![folner_box(&[8, 1]).unwrap(), folner_box(&[16, 1]).unwrap()];
        let r = entropy_bounds(&sys, &wins, &no_margin(2), &Limits::default()).unwrap();
        assert_eq!(r.bounds[0].count, UBig::from(55u32));
        assert_eq!(r.bounds[1].count, UBig::from(2584u32));
        assert!(close(r.bounds[0].value, 55f64.ln() / 8.0, 1e-12));
        assert!(close(r.bounds[1].value, 2584f64.ln() / 16.0, 1e-12));
        assert!(close(r.bounds[1].value, 0.4910684, 1e-7));
        assert_eq!(r.best_upper, r.bounds[1].value);
        assert_eq!(r.exact_value, None);
    }

    #[test]
    fn exact_one_dimensional_values() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(close(entropy_exact_1d(&corpus::golden_mean()).unwrap(), phi.ln(), 1e-9));
        assert!(close(entropy_exact_1d(&corpus::alternating()).unwrap(), 0.0, 1e-12));
        let full3 = SftSpec::full_shift(1, 3).unwrap();
        assert!(close(entropy_exact_1d(&full3).unwrap(), 3f64.ln(), 1e-12));
        assert!(matches!(
            entropy_exact_1d(&corpus::hard_square()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn hard_square_strips() {
        let v = strip_bounds_2d(&corpus::hard_square(), &[1, 2], &Limits::default()).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(close(v[0].1, phi.ln(), 1e-9));
        assert!(close(v[1].1, (1.0 + 2f64.sqrt()).ln() / 2.0, 1e-9));
    }

    #[test]
    fn strip_validation() {
        let gm = corpus::golden_mean();
        assert!(matches!(
            strip_bounds_2d(&gm, &[1], &Limits::default()),
            Err(Error::Dimension { .. })
        ));
        let hs = corpus::hard_square();
        assert!(strip_bounds_2d(&hs, &[13], &Limits::default()).is_err());
        let long = crate::shiftspace::Pattern::grid(&[&[1, 0, 1]]).unwrap();
        let wide = SftSpec::new(2, hs.alphabet().clone(), vec![long]).unwrap();
        assert!(matches!(
            strip_bounds_2d(&wide, &[2], &Limits::default()),
            Err(Error::UnsupportedInteraction(_))
        ));
    }

    #[test]
    fn log_is_power_consistent() {
        let c = UBig::from(55u32);
        for n in 1..=10usize {
            assert_eq!(log_count_per_site(&c.pow(n), 8 * n), log_count_per_site(&c, 8));
        }
    }

    #[test]
    fn empty_system_is_reported() {
        let gm = corpus::golden_mean();
        let all = vec![
            crate::shiftspace::Pattern::word(&[0]).unwrap(),
            crate::shiftspace::Pattern::word(&[1]).unwrap(),
        ];
        let empty = SftSpec::new(1, gm.alphabet().clone(), all).unwrap();
        assert!(matches!(entropy_exact_1d(&empty), Err(Error::EmptySystem(_))));
        let wins = vec![folner_box(&[2]).unwrap()];
        assert!(matches!(
            entropy_bounds(&empty, &wins, &no_margin(1), &Limits::default()),
            Err(Error::EmptySystem(_))
        ));
    }
}

use std::collections::BTreeSet;

use dashu::integer::UBig;
use proptest::prelude::*;

use shiftlab::corpus;
use shiftlab::entropy::{entropy_bounds, entropy_exact_1d, log_count_per_site, no_margin, strip_bounds_2d};
use shiftlab::lattice::{
    coset_decompose, folner_box, minkowski_extend, FiniteSet, Index, LatticePoint, ShiftedTransversal, SubgroupBasis,
    TransversalSection,
};
use shiftlab::projection::{
    assemble_phi, product_language, product_pieces, project_count, project_language, CosetFamily,
};
use shiftlab::shiftspace::{
    count_language, enumerate_language, locally_admissible, transfer_matrix_1d, Alphabet, Limits, Pattern, SftSpec,
    Symbol,
};

fn lim() -> Limits {
    Limits::default()
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

fn point(dim: usize, r: i64) -> impl Strategy<Value = LatticePoint> {
    prop::collection::vec(-r..=r, dim).prop_map(LatticePoint::new)
}

fn finite_set(dim: usize, r: i64, max: usize) -> impl Strategy<Value = FiniteSet> {
    prop::collection::vec(point(dim, r), 1..=max).prop_map(move |pts| FiniteSet::new(dim, pts).unwrap())
}

fn small_box(dim: usize, max_side: u64) -> impl Strategy<Value = FiniteSet> {
    prop::collection::vec(1..=max_side, dim).prop_map(|s| folner_box(&s).unwrap())
}

/// Full-rank 2-D bases with small entries, or rank-one rows.
fn basis_2d() -> impl Strategy<Value = SubgroupBasis> {
    let full = (prop::array::uniform4(-3i64..=3)).prop_filter_map("singular", |[a, b, c, d]| {
        (a * d - b * c != 0).then(|| SubgroupBasis::new(2, vec![vec![a, b], vec![c, d]]).unwrap())
    });
    let line = (-3i64..=3, -3i64..=3).prop_filter_map("zero row", |(a, b)| {
        ((a, b) != (0, 0)).then(|| SubgroupBasis::new(2, vec![vec![a, b]]).unwrap())
    });
    prop_oneof![full, line]
}

/// Random shifts of finite type with forbidden patterns of one to three
/// cells inside `[0, 1]^d`.
fn sft(dim: usize) -> impl Strategy<Value = SftSpec> {
    (2usize..=3).prop_flat_map(move |k| {
        let cells = folner_box(&vec![2; dim]).unwrap().points().to_vec();
        let n = cells.len();
        let pattern = prop::collection::btree_map(0..n, 0..k as Symbol, 1..=3.min(n))
            .prop_map(move |m| Pattern::from_cells(dim, m.into_iter().map(|(i, v)| (cells[i].clone(), v))).unwrap());
        prop::collection::vec(pattern, 1..=3)
            .prop_map(move |f| SftSpec::new(dim, Alphabet::numeric(k).unwrap(), f).unwrap())
    })
}

/// Every pattern on `F + S` that is locally admissible, restricted to `F`.
fn brute_language(sft: &SftSpec, window: &FiniteSet, margin: &FiniteSet) -> BTreeSet<Vec<Symbol>> {
    let ext = minkowski_extend(window, margin).unwrap();
    let k = sft.alphabet().len() as u64;
    let n = ext.len() as u32;
    let mut out = BTreeSet::new();
    for code in 0..k.pow(n) {
        let mut c = code;
        let values: Vec<Symbol> = (0..n)
            .map(|_| {
                let v = (c % k) as Symbol;
                c /= k;
                v
            })
            .collect();
        let p = Pattern::new(ext.clone(), values).unwrap();
        if locally_admissible(&p, sft).unwrap() {
            out.insert(p.restrict(window).unwrap().values().to_vec());
        }
    }
    out
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn coset_parts_partition_the_window(f in finite_set(2, 4, 12), h in basis_2d()) {
        let section = TransversalSection::new(&h).unwrap();
        let parts = coset_decompose(&f, &section).unwrap();
        let total: usize = parts.iter().map(|p| p.part.len()).sum();
        prop_assert_eq!(total, f.len());
        let mut seen = BTreeSet::new();
        for p in &parts {
            for g in p.part.iter() {
                prop_assert!(f.contains(g));
                prop_assert!(seen.insert(g.clone()));
                prop_assert_eq!(&section.rep(g), &p.rep);
            }
        }
        let reps: BTreeSet<_> = parts.iter().map(|p| p.rep.clone()).collect();
        prop_assert_eq!(reps.len(), parts.len());
        prop_assert!(parts.windows(2).all(|w| w[0].rep < w[1].rep));
    }

    #[test]
    fn representatives_are_canonical(g in point(2, 20), h in basis_2d(), a in -5i64..=5, b in -5i64..=5) {
        let section = TransversalSection::new(&h).unwrap();
        let r = section.rep(&g);
        prop_assert!(section.contains(&(&g - &r)));
        prop_assert_eq!(section.rep(&r), r.clone());
        let coeffs: Vec<i64> = [a, b][..h.rank()].to_vec();
        let moved = &g + &h.embed(&coeffs);
        prop_assert_eq!(section.rep(&moved), r);
        prop_assert_eq!(section.coordinates(&h.embed(&coeffs)), Some(coeffs));
    }

    #[test]
    fn finite_index_counts_representatives(h in basis_2d()) {
        if let Index::Finite(n) = h.index() {
            let rows = h.rows();
            let det = (rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]).unsigned_abs();
            prop_assert_eq!(n, det);
            let section = TransversalSection::new(&h).unwrap();
            let reps: BTreeSet<_> = folner_box(&[det, det]).unwrap().iter().map(|g| section.rep(g)).collect();
            prop_assert_eq!(reps.len() as u64, det);
        } else {
            prop_assert_eq!(h.rank(), 1);
        }
    }

    #[test]
    fn minkowski_is_monotone_and_associative(
        f in finite_set(2, 3, 6),
        s1 in finite_set(2, 1, 4),
        s2 in finite_set(2, 1, 4),
    ) {
        let o = FiniteSet::origin(2);
        let s1 = s1.union(&o).unwrap();
        let s2 = s2.union(&o).unwrap();
        let e1 = minkowski_extend(&f, &s1).unwrap();
        prop_assert!(f.is_subset(&e1));
        let s12 = minkowski_extend(&s1, &s2).unwrap();
        prop_assert_eq!(minkowski_extend(&e1, &s2).unwrap(), minkowski_extend(&f, &s12).unwrap());
    }

    #[test]
    fn language_matches_brute_force(sys in sft(2), w in small_box(2, 2), j in 0i64..=1) {
        let margin = FiniteSet::centered_cube(2, j);
        let ext = minkowski_extend(&w, &margin).unwrap();
        prop_assume!((sys.alphabet().len() as f64).powi(ext.len() as i32) <= 70_000.0);
        let oracle = brute_language(&sys, &w, &margin);
        let got = enumerate_language(&sys, &w, &margin, &lim()).unwrap();
        let got_set: BTreeSet<_> = got.words().iter().cloned().collect();
        prop_assert_eq!(&got_set, &oracle);
        prop_assert!(got.words().windows(2).all(|p| p[0] < p[1]));
        let c = count_language(&sys, &w, &margin, &lim()).unwrap();
        prop_assert_eq!(c.count, UBig::from(oracle.len()));
    }

    #[test]
    fn larger_margins_shrink_languages(sys in sft(2), w in small_box(2, 3)) {
        let small = enumerate_language(&sys, &w, &no_margin(2), &lim()).unwrap();
        let large = enumerate_language(&sys, &w, &FiniteSet::centered_cube(2, 1), &lim()).unwrap();
        prop_assert!(large.words().iter().all(|x| small.contains_word(x)));
    }

    #[test]
    fn languages_are_shift_invariant(sys in sft(2), w in small_box(2, 3), v in point(2, 7), j in 0i64..=1) {
        let margin = FiniteSet::centered_cube(2, j);
        let a = count_language(&sys, &w, &margin, &lim()).unwrap();
        let b = count_language(&sys, &w.translate(&v), &margin, &lim()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn restrictions_stay_in_the_language(sys in sft(2), w in small_box(2, 3), keep in prop::collection::vec(any::<bool>(), 9)) {
        let sub: Vec<LatticePoint> = w.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| p.clone()).collect();
        prop_assume!(!sub.is_empty());
        let sub = FiniteSet::new(2, sub).unwrap();
        let big = enumerate_language(&sys, &w, &no_margin(2), &lim()).unwrap();
        let small = enumerate_language(&sys, &sub, &no_margin(2), &lim()).unwrap();
        for p in big.patterns() {
            prop_assert!(small.contains(&p.restrict(&sub).unwrap()));
        }
    }

    #[test]
    fn one_dimensional_counts_match_matrix_powers(sys in sft(1), n in 1usize..=12) {
        let t = transfer_matrix_1d(&sys).unwrap();
        let w = folner_box(&[n as u64]).unwrap();
        let c = count_language(&sys, &w, &no_margin(1), &lim()).unwrap();
        if let Some(expected) = t.word_count(n) {
            prop_assert_eq!(c.count, UBig::from(expected));
        }
    }

    #[test]
    fn full_shift_ignores_margins(k in 1usize..=3, w in small_box(2, 3), j in 0i64..=2) {
        let full = SftSpec::full_shift(2, k).unwrap();
        let c = count_language(&full, &w, &FiniteSet::centered_cube(2, j), &lim()).unwrap();
        prop_assert_eq!(c.count, UBig::from(k).pow(w.len()));
        prop_assert!(c.exact);
    }

    #[test]
    fn window_bounds_sit_above_exact_entropy(sys in sft(1)) {
        let Ok(h) = entropy_exact_1d(&sys) else { return Ok(()); };
        let wins: Vec<_> = (1..=10).map(|n| folner_box(&[n]).unwrap()).collect();
        for margin in [no_margin(1), FiniteSet::centered_cube(1, 3)] {
            let r = entropy_bounds(&sys, &wins, &margin, &lim()).unwrap();
            for b in &r.bounds {
                prop_assert!(b.value >= h - 1e-9, "{} < {}", b.value, h);
                prop_assert_eq!(b.value, log_count_per_site(&b.count, b.window.len()));
            }
            prop_assert!(r.exact_value.unwrap() <= r.best_upper + 1e-9);
        }
    }

    #[test]
    fn best_upper_never_increases_along_chains(sys in sft(2)) {
        let chain: Vec<_> = (1..=4).map(|n| folner_box(&[n, n]).unwrap()).collect();
        let mut last = f64::INFINITY;
        for i in 1..=chain.len() {
            let Ok(r) = entropy_bounds(&sys, &chain[..i], &no_margin(2), &lim()) else { return Ok(()); };
            prop_assert!(r.best_upper <= last);
            last = r.best_upper;
        }
    }

    #[test]
    fn product_contains_the_system(sys in sft(2), h in basis_2d(), w in small_box(2, 3), j in 0i64..=1) {
        let margin = FiniteSet::centered_cube(2, j);
        let section = TransversalSection::new(&h).unwrap();
        let x = enumerate_language(&sys, &w, &margin, &lim()).unwrap();
        let p = product_language(&sys, &section, &w, &margin, &lim()).unwrap();
        prop_assert!(x.words().iter().all(|v| p.contains_word(v)));
        let pieces = product_pieces(&section, &w).unwrap();
        let expected: UBig = pieces
            .iter()
            .map(|pc| project_count(&sys, &h, &pc.sub_window, &margin, &lim()).unwrap().count)
            .product();
        prop_assert_eq!(UBig::from(p.len()), expected);
    }

    #[test]
    fn product_ignores_the_transversal(sys in sft(2), h in basis_2d(), w in small_box(2, 3), a in -3i64..=3, b in -3i64..=3) {
        let section = TransversalSection::new(&h).unwrap();
        let r = h.rank();
        let shifted = ShiftedTransversal::new(&section, move |rep: &LatticePoint| {
            let c = rep.coords();
            [a * c[0] + b * c[1] + 1, b - c[0]][..r].to_vec()
        });
        let x = product_language(&sys, &section, &w, &no_margin(2), &lim()).unwrap();
        let y = product_language(&sys, &shifted, &w, &no_margin(2), &lim()).unwrap();
        prop_assert_eq!(x.words(), y.words());
    }

    #[test]
    fn projected_counts_are_shift_invariant(sys in sft(2), h in basis_2d(), n in 1u64..=4, v in -6i64..=6, u in -6i64..=6) {
        let sub = folner_box(&vec![n; h.rank()]).unwrap();
        let shift = LatticePoint::new([v, u][..h.rank()].to_vec());
        let a = project_count(&sys, &h, &sub, &no_margin(2), &lim()).unwrap();
        let b = project_count(&sys, &h, &sub.translate(&shift), &no_margin(2), &lim()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn phi_is_injective_on_covered_points(
        rows in prop::collection::vec(prop::collection::vec(0u8..2, 3), 3),
        flip_row in 0usize..3,
        flip_col in 0usize..3,
    ) {
        let h = SubgroupBasis::new(2, vec![vec![1, 0]]).unwrap();
        let section = TransversalSection::new(&h).unwrap();
        let family = |rows: &[Vec<u8>]| {
            CosetFamily::new(
                &section,
                rows.iter().enumerate().map(|(j, r)| (LatticePoint::from([0, j as i64]), Pattern::word(r).unwrap())),
            )
            .unwrap()
        };
        let mut other = rows.clone();
        other[flip_row][flip_col] ^= 1;
        let f = folner_box(&[3, 3]).unwrap();
        let a = assemble_phi(&family(&rows), &section, &f).unwrap();
        let b = assemble_phi(&family(&other), &section, &f).unwrap();
        prop_assert_ne!(&a, &b);
        let g = LatticePoint::from([flip_col as i64, flip_row as i64]);
        prop_assert_ne!(a.get(&g), b.get(&g));
    }
}

#[test]
fn phi_images_agree_across_transversals() {
    // H = Z x {0}; families are pairs of binary rows on the sub-window
    // [-2, 2], enough to cover a 2x2 window under either transversal.
    let h = SubgroupBasis::new(2, vec![vec![1, 0]]).unwrap();
    let section = TransversalSection::new(&h).unwrap();
    let shifted = ShiftedTransversal::new(&section, |rep: &LatticePoint| vec![rep.coords()[1] - 1]);
    let f = folner_box(&[2, 2]).unwrap();
    let sub = FiniteSet::from_coords(1, (-2..=2).map(|i| [i])).unwrap();
    let mut canon = BTreeSet::new();
    let mut moved = BTreeSet::new();
    for code in 0u32..(1 << 10) {
        let row = |shift: u32| -> Pattern {
            Pattern::new(sub.clone(), (0..5).map(|i| ((code >> (shift + i)) & 1) as u8).collect()).unwrap()
        };
        let fam = CosetFamily::new(
            &section,
            [
                (LatticePoint::from([0, 0]), row(0)),
                (LatticePoint::from([0, 1]), row(5)),
            ],
        )
        .unwrap();
        canon.insert(assemble_phi(&fam, &section, &f).unwrap());
        moved.insert(assemble_phi(&fam, &shifted, &f).unwrap());
    }
    assert_eq!(canon.len(), 16);
    assert_eq!(canon, moved);
}

#[test]
fn one_dimensional_margins_match_matrix_powers_on_corpus() {
    let systems = [
        corpus::golden_mean(),
        corpus::alternating(),
        SftSpec::full_shift(1, 3).unwrap(),
    ];
    for sys in systems {
        let t = transfer_matrix_1d(&sys).unwrap();
        let margin = FiniteSet::centered_cube(1, sys.interaction_diameter() as i64);
        for n in 1..=12usize {
            let w = folner_box(&[n as u64]).unwrap();
            let lang = enumerate_language(&sys, &w, &margin, &lim()).unwrap();
            assert!(lang.exact());
            if let Some(expected) = t.word_count(n) {
                assert_eq!(lang.len() as u128, expected, "length {n}");
            }
        }
    }
}

#[test]
fn hard_square_strips_decrease() {
    let widths: Vec<usize> = (1..=8).collect();
    let v = strip_bounds_2d(&corpus::hard_square(), &widths, &lim()).unwrap();
    for pair in v.windows(2) {
        assert!(pair[1].1 <= pair[0].1 + 1e-12, "{pair:?}");
    }
}

#[test]
fn full_shift_strips_are_ln_k() {
    let full = SftSpec::full_shift(2, 2).unwrap();
    for (_, v) in strip_bounds_2d(&full, &[1, 4, 12], &lim()).unwrap() {
        assert!((v - 2f64.ln()).abs() < 1e-12);
    }
}

#[test]
fn projected_language_is_golden_mean_on_rows() {
    let h = SubgroupBasis::new(2, vec![vec![1, 0]]).unwrap();
    for sys in [corpus::hard_square(), corpus::golden_mean_rows()] {
        for n in 1..=8u64 {
            let w = folner_box(&[n]).unwrap();
            let a = project_language(&sys, &h, &w, &FiniteSet::centered_cube(2, 1), &lim()).unwrap();
            let b = enumerate_language(&corpus::golden_mean(), &w, &no_margin(1), &lim()).unwrap();
            assert_eq!(a.words(), b.words());
        }
    }
}

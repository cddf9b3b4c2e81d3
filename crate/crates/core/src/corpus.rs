//! The example systems used throughout the tests and the guide, both as
//! ready-made [`SftSpec`] values and as bundled JSON spec files.

use crate::lattice::LatticePoint;
use crate::shiftspace::{Alphabet, Pattern, SftSpec, Symbol};

/// Bundled spec files, by name.
pub const BUILTIN: &[(&str, &str)] = &[
    ("full-shift-2", include_str!("../corpus/full-shift-2.json")),
    ("golden-mean-1d", include_str!("../corpus/golden-mean-1d.json")),
    (
        "golden-mean-rows-2d",
        include_str!("../corpus/golden-mean-rows-2d.json"),
    ),
    ("hard-square", include_str!("../corpus/hard-square.json")),
    ("checkerboard", include_str!("../corpus/checkerboard.json")),
    ("two-fixed-points", include_str!("../corpus/two-fixed-points.json")),
];

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Two-cell pattern `a` at the origin, `b` at `step`.
fn domino(step: &[i64], a: Symbol, b: Symbol) -> Pattern {
    let dim = step.len();
    Pattern::from_cells(dim, [(LatticePoint::origin(dim), a), (LatticePoint::from(step), b)]).expect("distinct cells")
}

fn binary(dim: usize, forbidden: Vec<Pattern>) -> SftSpec {
    SftSpec::new(dim, Alphabet::numeric(2).expect("two symbols"), forbidden).expect("valid system")
}

/// `d = 1`, no two consecutive 1s.
pub fn golden_mean() -> SftSpec {
    binary(1, vec![domino(&[1], 1, 1)])
}

/// `d = 1`, forbids `00` and `11`: only the two alternating points.
pub fn alternating() -> SftSpec {
    binary(1, vec![domino(&[1], 0, 0), domino(&[1], 1, 1)])
}

/// `d = 2`, no two horizontally adjacent 1s; rows are independent.
pub fn golden_mean_rows() -> SftSpec {
    binary(2, vec![domino(&[1, 0], 1, 1)])
}

/// `d = 2`, no two horizontally or vertically adjacent 1s.
pub fn hard_square() -> SftSpec {
    binary(2, vec![domino(&[1, 0], 1, 1), domino(&[0, 1], 1, 1)])
}

/// `d = 2`, neighbours always differ: the two chessboard colourings.
pub fn checkerboard() -> SftSpec {
    binary(
        2,
        vec![
            domino(&[1, 0], 0, 0),
            domino(&[1, 0], 1, 1),
            domino(&[0, 1], 0, 0),
            domino(&[0, 1], 1, 1),
        ],
    )
}

/// `d = 2`, neighbours always agree: the all-0 and all-1 points.
pub fn two_fixed_points() -> SftSpec {
    binary(
        2,
        vec![
            domino(&[1, 0], 0, 1),
            domino(&[1, 0], 1, 0),
            domino(&[0, 1], 0, 1),
            domino(&[0, 1], 1, 0),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse_system_spec;

    #[test]
    fn bundled_specs_match_builders() {
        let pairs = [
            ("golden-mean-1d", golden_mean()),
            ("golden-mean-rows-2d", golden_mean_rows()),
            ("hard-square", hard_square()),
            ("checkerboard", checkerboard()),
            ("two-fixed-points", two_fixed_points()),
            ("full-shift-2", SftSpec::full_shift(2, 2).unwrap()),
        ];
        for (name, sft) in pairs {
            let spec = parse_system_spec(builtin(name).unwrap().as_bytes()).unwrap();
            assert_eq!(spec.name, name);
            assert_eq!(spec.to_sft().unwrap(), sft, "{name}");
        }
    }
}

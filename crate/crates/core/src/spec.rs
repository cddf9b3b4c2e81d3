//! JSON system specifications.
//!
//! ```json
//! {
//!   "name": "hard-square",
//!   "dim": 2,
//!   "alphabet": ["0", "1"],
//!   "forbidden": [
//!     {"offsets": [[0, 0], [1, 0]], "symbols": ["1", "1"]},
//!     {"offsets": [[0, 0], [0, 1]], "symbols": ["1", "1"]}
//!   ],
//!   "subgroup": [[1, 0]],
//!   "mixing_shape": [[-1, -1], [-1, 0], [-1, 1], [0, -1], [0, 0], [0, 1], [1, -1], [1, 0], [1, 1]],
//!   "windows": [[1, 1], [2, 2], [3, 3]],
//!   "margin": [[0, 0]]
//! }
//! ```
//!
//! Validation errors carry a JSON pointer to the offending value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irreducibility::MixingShape;
use crate::lattice::{folner_box, FiniteSet, LatticePoint, SubgroupBasis};
use crate::shiftspace::{Alphabet, Pattern, SftSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForbiddenEntry {
    pub offsets: Vec<Vec<i64>>,
    pub symbols: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub name: String,
    pub dim: usize,
    pub alphabet: Vec<String>,
    #[serde(default)]
    pub forbidden: Vec<ForbiddenEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing_shape: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub windows: Vec<Vec<u64>>,
    pub margin: Vec<Vec<i64>>,
}

/// Parses and validates a spec. Every cross-reference is checked here, so
/// the conversion methods below cannot fail on a parsed spec except for
/// capacity limits.
pub fn parse_system_spec(text: &[u8]) -> Result<SystemSpec> {
    let text = std::str::from_utf8(text).map_err(|e| Error::spec("", format!("not UTF-8: {e}")))?;
    let spec: SystemSpec = serde_json::from_str(text).map_err(|e| Error::spec("", e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

fn check_vector(v: &[i64], dim: usize, path: &str) -> Result<()> {
    if v.len() != dim {
        return Err(Error::spec(
            path,
            format!("expected {dim} coordinates, found {}", v.len()),
        ));
    }
    Ok(())
}

fn point_set(dim: usize, vectors: &[Vec<i64>], path: &str) -> Result<FiniteSet> {
    for (i, v) in vectors.iter().enumerate() {
        check_vector(v, dim, &format!("{path}/{i}"))?;
    }
    FiniteSet::new(dim, vectors.iter().map(|v| LatticePoint::new(v.clone())))
        .map_err(|e| Error::spec(path, e.to_string()))
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim;
        if dim == 0 {
            return Err(Error::spec("/dim", "dimension must be positive"));
        }
        Alphabet::new(self.alphabet.iter().cloned()).map_err(|e| Error::spec("/alphabet", e.to_string()))?;
        for (i, f) in self.forbidden.iter().enumerate() {
            let base = format!("/forbidden/{i}");
            if f.offsets.is_empty() {
                return Err(Error::spec(format!("{base}/offsets"), "empty forbidden pattern"));
            }
            if f.offsets.len() != f.symbols.len() {
                return Err(Error::spec(
                    base,
                    format!("{} offsets but {} symbols", f.offsets.len(), f.symbols.len()),
                ));
            }
            for (j, o) in f.offsets.iter().enumerate() {
                check_vector(o, dim, &format!("{base}/offsets/{j}"))?;
                if f.offsets[..j].contains(o) {
                    return Err(Error::spec(format!("{base}/offsets/{j}"), "repeated offset"));
                }
            }
            for (j, s) in f.symbols.iter().enumerate() {
                if !self.alphabet.contains(s) {
                    return Err(Error::spec(
                        format!("{base}/symbols/{j}"),
                        format!("unknown symbol {s:?}"),
                    ));
                }
            }
        }
        if let Some(rows) = &self.subgroup {
            for (i, r) in rows.iter().enumerate() {
                check_vector(r, dim, &format!("/subgroup/{i}"))?;
            }
            SubgroupBasis::new(dim, rows.clone()).map_err(|e| Error::spec("/subgroup", e.to_string()))?;
        }
        if let Some(shape) = &self.mixing_shape {
            let set = point_set(dim, shape, "/mixing_shape")?;
            MixingShape::new(set).map_err(|e| Error::spec("/mixing_shape", e.to_string()))?;
        }
        for (i, w) in self.windows.iter().enumerate() {
            let path = format!("/windows/{i}");
            if w.len() != dim {
                return Err(Error::spec(path, format!("expected {dim} sides, found {}", w.len())));
            }
            if w.contains(&0) {
                return Err(Error::spec(path, "box sides must be positive"));
            }
        }
        let margin = point_set(dim, &self.margin, "/margin")?;
        if !margin.iter().any(LatticePoint::is_origin) {
            return Err(Error::spec("/margin", "margin must contain the zero vector"));
        }
        Ok(())
    }

    pub fn to_sft(&self) -> Result<SftSpec> {
        let alphabet = Alphabet::new(self.alphabet.iter().cloned())?;
        let forbidden = self
            .forbidden
            .iter()
            .map(|f| {
                let cells = f.offsets.iter().zip(&f.symbols).map(|(o, s)| {
                    (
                        LatticePoint::new(o.clone()),
                        alphabet.index_of(s).expect("validated symbol"),
                    )
                });
                Pattern::from_cells(self.dim, cells)
            })
            .collect::<Result<Vec<_>>>()?;
        SftSpec::new(self.dim, alphabet, forbidden)
    }

    pub fn subgroup_basis(&self) -> Result<Option<SubgroupBasis>> {
        self.subgroup
            .as_ref()
            .map(|rows| SubgroupBasis::new(self.dim, rows.clone()))
            .transpose()
    }

    pub fn mixing(&self) -> Result<Option<MixingShape>> {
        self.mixing_shape
            .as_ref()
            .map(|pts| MixingShape::new(point_set(self.dim, pts, "/mixing_shape")?))
            .transpose()
    }

    pub fn window_sets(&self) -> Result<Vec<FiniteSet>> {
        self.windows.iter().map(|w| folner_box(w)).collect()
    }

    pub fn margin_set(&self) -> Result<FiniteSet> {
        point_set(self.dim, &self.margin, "/margin")
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }

    /// Sorted-key JSON, the form written into reports.
    pub fn to_canonical_json(&self) -> String {
        crate::report::canonical_json(&self.to_value())
    }
}

//! Graded bimodules over the semisimple base ring `R = K^m` and the generic
//! chain-complex container used by every cohomology computation.
//!
//! A [`GradedSpace`] is a finite list of basis elements, each tagged with a
//! degree, a pair of idempotent indices (the element `x` with target `j` and
//! source `i` spans a piece of `e_j X e_i`), and an optional non-negative
//! weight. Composition of tags reads right-to-left: in a tensor word
//! `x ⊗ y`, the source of `x` must equal the target of `y`.

use crate::matrix::{cohomology_at, Cohomology, LinAlgError, SparseMatrix};
use crate::scalar::Field;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// The base ring `R = K^m`: `m` orthogonal idempotents `e_1, …, e_m`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BaseRing {
    m: usize,
}

impl BaseRing {
    pub fn new(m: usize) -> Result<BaseRing, GradedError> {
        if m == 0 {
            return Err(GradedError::EmptyBaseRing);
        }
        Ok(BaseRing { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Idempotent indices are 1-based externally (`e_1 … e_m`).
    pub fn check_idempotent(&self, i: usize) -> Result<(), GradedError> {
        if i == 0 || i > self.m {
            return Err(GradedError::BadIdempotent {
                index: i,
                m: self.m,
            });
        }
        Ok(())
    }
}

/// Whether degrees live in `Z` or `Z/2`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum GradingMode {
    Z,
    Z2,
}

impl GradingMode {
    /// Normalize a degree for storage in this mode.
    pub fn normalize(&self, d: i64) -> i64 {
        match self {
            GradingMode::Z => d,
            GradingMode::Z2 => d.rem_euclid(2),
        }
    }
}

/// One basis element of a graded `R`-bimodule.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BasisElement {
    pub id: String,
    pub degree: i64,
    /// Target idempotent `j`: the element lies in `e_j X e_i`.
    pub target: usize,
    /// Source idempotent `i`.
    pub source: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weight: Option<i64>,
}

/// Errors from graded-space construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GradedError {
    EmptyBaseRing,
    BadIdempotent {
        index: usize,
        m: usize,
    },
    DuplicateId(String),
    UnknownId(String),
    BaseRingMismatch,
    /// A claimed unit element is missing, off-diagonal, or has nonzero degree.
    BadUnit(String),
}

impl fmt::Display for GradedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradedError::EmptyBaseRing => write!(f, "base ring needs at least one idempotent"),
            GradedError::BadIdempotent { index, m } => {
                write!(f, "idempotent index {index} out of range 1..={m}")
            }
            GradedError::DuplicateId(id) => write!(f, "duplicate basis id {id:?}"),
            GradedError::UnknownId(id) => write!(f, "unknown basis id {id:?}"),
            GradedError::BaseRingMismatch => write!(f, "operands have different base rings"),
            GradedError::BadUnit(id) => write!(
                f,
                "unit {id:?} must be an existing degree-0 diagonal element (target = source)"
            ),
        }
    }
}

impl std::error::Error for GradedError {}

/// A finite-dimensional graded `R`-bimodule with a distinguished basis.
#[derive(Clone, PartialEq, Debug)]
pub struct GradedSpace {
    base: BaseRing,
    mode: GradingMode,
    basis: Vec<BasisElement>,
    index: HashMap<String, usize>,
}

impl GradedSpace {
    pub fn new(
        base: BaseRing,
        mode: GradingMode,
        elements: Vec<BasisElement>,
    ) -> Result<GradedSpace, GradedError> {
        let mut index = HashMap::new();
        let mut basis = Vec::with_capacity(elements.len());
        for mut el in elements {
            base.check_idempotent(el.target)?;
            base.check_idempotent(el.source)?;
            el.degree = mode.normalize(el.degree);
            if index.insert(el.id.clone(), basis.len()).is_some() {
                return Err(GradedError::DuplicateId(el.id));
            }
            basis.push(el);
        }
        Ok(GradedSpace {
            base,
            mode,
            basis,
            index,
        })
    }

    pub fn base(&self) -> BaseRing {
        self.base
    }

    pub fn mode(&self) -> GradingMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn element(&self, idx: usize) -> &BasisElement {
        &self.basis[idx]
    }

    pub fn index_of(&self, id: &str) -> Result<usize, GradedError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| GradedError::UnknownId(id.to_string()))
    }

    pub fn degree(&self, idx: usize) -> i64 {
        self.basis[idx].degree
    }

    /// Reduced degree `‖x‖ = |x| − 1`, the exponent governing bar-side signs.
    pub fn reduced_degree(&self, idx: usize) -> i64 {
        self.mode.normalize(self.basis[idx].degree - 1)
    }

    /// Downward shift: element of degree `d` in `X` has degree `d − k` in
    /// `X[k]`. Ids, idempotents, and weights are unchanged.
    pub fn shift(&self, k: i64) -> GradedSpace {
        let basis = self
            .basis
            .iter()
            .map(|el| BasisElement {
                degree: self.mode.normalize(el.degree - k),
                ..el.clone()
            })
            .collect();
        GradedSpace {
            base: self.base,
            mode: self.mode,
            basis,
            index: self.index.clone(),
        }
    }

    /// Dual space: same labels (position-preserving, so `dual ∘ dual = id`),
    /// negated degrees, swapped idempotents.
    pub fn dual(&self) -> GradedSpace {
        let basis = self
            .basis
            .iter()
            .map(|el| BasisElement {
                id: el.id.clone(),
                degree: self.mode.normalize(-el.degree),
                target: el.source,
                source: el.target,
                weight: el.weight.map(|w| -w),
            })
            .collect();
        GradedSpace {
            base: self.base,
            mode: self.mode,
            basis,
            index: self.index.clone(),
        }
    }

    /// Tensor product over `R`: basis pairs `x ⊗ y` with
    /// `source(x) = target(y)`; degrees and weights add.
    pub fn tensor_over_r(&self, other: &GradedSpace) -> Result<GradedSpace, GradedError> {
        if self.base != other.base {
            return Err(GradedError::BaseRingMismatch);
        }
        let mut elements = Vec::new();
        for x in &self.basis {
            for y in &other.basis {
                if x.source != y.target {
                    continue;
                }
                elements.push(BasisElement {
                    id: format!("{}⊗{}", x.id, y.id),
                    degree: self.mode.normalize(x.degree + y.degree),
                    target: x.target,
                    source: y.source,
                    weight: match (x.weight, y.weight) {
                        (Some(a), Some(b)) => Some(a + b),
                        _ => None,
                    },
                });
            }
        }
        GradedSpace::new(self.base, self.mode, elements)
    }

    /// Quotient by the span of the units: the reduced space `Ā = A / K·e_A`.
    ///
    /// The `unit_ids` must be degree-0 diagonal elements, one per idempotent.
    pub fn reduced(&self, unit_ids: &[String]) -> Result<GradedSpace, GradedError> {
        let mut unit_idx = Vec::new();
        for id in unit_ids {
            let i = self.index_of(id)?;
            let el = &self.basis[i];
            if el.degree != 0 || el.target != el.source {
                return Err(GradedError::BadUnit(id.clone()));
            }
            unit_idx.push(i);
        }
        let elements = self
            .basis
            .iter()
            .enumerate()
            .filter(|(i, _)| !unit_idx.contains(i))
            .map(|(_, el)| el.clone())
            .collect();
        GradedSpace::new(self.base, self.mode, elements)
    }

    /// Indices grouped by degree, each group in basis order.
    pub fn by_degree(&self) -> BTreeMap<i64, Vec<usize>> {
        let mut out: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, el) in self.basis.iter().enumerate() {
            out.entry(el.degree).or_default().push(i);
        }
        out
    }

    /// Dimension of `e_j X e_i`.
    pub fn dim_component(&self, target: usize, source: usize) -> usize {
        self.basis
            .iter()
            .filter(|el| el.target == target && el.source == source)
            .count()
    }
}

// --- chain complexes ---------------------------------------------------------

/// A bounded cochain complex: per-degree bases with labels and per-degree
/// differentials of degree `+1`.
///
/// Degrees with no stored basis are zero; a missing differential out of a
/// nonempty degree means the zero map.
#[derive(Clone, Debug)]
pub struct Complex {
    field: Field,
    /// degree → labels of the chosen basis in that degree.
    pub spaces: BTreeMap<i64, Vec<String>>,
    /// degree `d` → matrix of `d: C^d → C^{d+1}`.
    pub diffs: BTreeMap<i64, SparseMatrix>,
}

impl Complex {
    pub fn new(field: Field) -> Complex {
        Complex {
            field,
            spaces: BTreeMap::new(),
            diffs: BTreeMap::new(),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim_at(&self, degree: i64) -> usize {
        self.spaces.get(&degree).map_or(0, |v| v.len())
    }

    /// The differential out of `degree` (zero matrix if absent).
    pub fn diff_at(&self, degree: i64) -> SparseMatrix {
        match self.diffs.get(&degree) {
            Some(m) => m.clone(),
            None => SparseMatrix::new(self.dim_at(degree + 1), self.dim_at(degree), self.field),
        }
    }

    /// Install a differential, checking its shape.
    pub fn set_diff(&mut self, degree: i64, m: SparseMatrix) -> Result<(), LinAlgError> {
        let expected = (self.dim_at(degree + 1), self.dim_at(degree));
        if (m.rows(), m.cols()) != expected {
            return Err(LinAlgError::DimensionMismatch {
                left: expected,
                right: (m.rows(), m.cols()),
                op: "set_diff",
            });
        }
        self.diffs.insert(degree, m);
        Ok(())
    }

    /// Verify `d ∘ d = 0` at every degree; returns the first failure.
    pub fn check_d_squared(&self) -> Result<(), LinAlgError> {
        for (&d, _) in &self.spaces {
            let first = self.diff_at(d);
            let second = self.diff_at(d + 1);
            let square = second.mul(&first)?;
            if !square.is_zero() {
                let col = square.iter().next().map(|(_, c, _)| c).unwrap();
                return Err(LinAlgError::NotAComplex {
                    witness_column: col,
                    image: square.column(col),
                });
            }
        }
        Ok(())
    }

    /// Cohomology at one degree.
    pub fn cohomology(&self, degree: i64) -> Result<Cohomology, LinAlgError> {
        cohomology_at(&self.diff_at(degree - 1), &self.diff_at(degree))
    }

    /// Cohomology dimensions over a degree window (inclusive).
    pub fn cohomology_dims(&self, lo: i64, hi: i64) -> Result<BTreeMap<i64, usize>, LinAlgError> {
        let mut out = BTreeMap::new();
        for d in lo..=hi {
            out.insert(d, self.cohomology(d)?.dim);
        }
        Ok(out)
    }

    /// Total dimension across stored degrees.
    pub fn total_dim(&self) -> usize {
        self.spaces.values().map(|v| v.len()).sum()
    }
}

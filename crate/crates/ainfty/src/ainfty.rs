//! A∞-algebras over `R = K^m`: structure-map storage, strict unitality,
//! relation checking, and the cohomology-level associative algebra.
//!
//! Structure maps `μ^d: A^{⊗d} → A[2−d]` are stored sparsely as entries
//! (input word, output, scalar), words right-to-left (`w[0] = a_1`). The
//! defining relation, with `✠_n = ‖a_1‖ + ⋯ + ‖a_n‖`, is
//!
//! ```text
//! Σ_{m,n} (−1)^{✠_n} μ^{d−m+1}(a_d, …, a_{n+m+1}, μ^m(a_{n+m}, …, a_{n+1}), a_n, …, a_1) = 0.
//! ```
//!
//! Strict unitality is canonical data, not user input: `μ²(a, e) = a`,
//! `μ²(e, a) = (−1)^{|a|} a`, and every other `μ` with a unit slot vanishes.
//! Relations are complete once checked in all arities `n ≤ 2·max_arity − 1`:
//! a composition of two operations of arities `p, q ≤ max_arity` has total
//! arity `p + q − 1`, so higher relations vanish termwise.

use crate::conventions;
use crate::graded::{GradedError, GradedSpace};
use crate::matrix::{cohomology_at, Cohomology, LinAlgError, SparseMatrix};
use crate::scalar::{Field, Scalar};
use crate::words::{composable_words, word_reduced_degree};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;

/// A linear combination of basis elements: index → nonzero coefficient.
pub type Combo = BTreeMap<usize, Scalar>;

/// Combo helpers shared across the engine.
pub mod combo {
    use super::*;

    /// `c += s·x_idx`, dropping the entry if it cancels.
    pub fn add_term(c: &mut Combo, idx: usize, s: Scalar) {
        if s.is_zero() {
            return;
        }
        match c.get_mut(&idx) {
            Some(cur) => {
                let sum = &*cur + &s;
                if sum.is_zero() {
                    c.remove(&idx);
                } else {
                    *cur = sum;
                }
            }
            None => {
                c.insert(idx, s);
            }
        }
    }

    /// `c += s·other`.
    pub fn add_scaled(c: &mut Combo, other: &Combo, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        for (&i, v) in other {
            add_term(c, i, v * s);
        }
    }
}

/// One structure-map entry: `μ(word) ∋ coeff·output`.
#[derive(Clone, PartialEq, Debug)]
pub struct MuEntry {
    /// Input word, right-to-left (`word[0] = a_1`).
    pub word: Vec<usize>,
    pub output: usize,
    pub coeff: Scalar,
}

/// Errors from A∞-algebra construction.
#[derive(Clone, PartialEq, Debug)]
pub enum AInftyError {
    Graded(GradedError),
    /// μ entry with empty input word.
    EmptyWord,
    /// μ entry whose word is not idempotent-composable, or whose output does
    /// not match the word's endpoints.
    NotComposable {
        entry: String,
    },
    /// Degree rule `|μ^d(w)| = Σ|w| + 2 − d` violated.
    DegreeRule {
        entry: String,
        expected: i64,
        found: i64,
    },
    /// Weight homogeneity violated on a fully weighted space.
    WeightRule {
        entry: String,
    },
    /// User entries may not mention the units (unit products are canonical).
    UnitEntry {
        entry: String,
    },
    /// Arity above the load-time cap.
    ArityCap {
        arity: usize,
        cap: usize,
    },
    /// Wrong number of units, or a bad unit element.
    Units(String),
}

impl fmt::Display for AInftyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AInftyError::Graded(e) => write!(f, "{e}"),
            AInftyError::EmptyWord => write!(f, "μ entry with empty input word"),
            AInftyError::NotComposable { entry } => {
                write!(f, "μ entry {entry} is not idempotent-compatible")
            }
            AInftyError::DegreeRule { entry, expected, found } => write!(
                f,
                "μ entry {entry} violates the degree rule: output degree {found}, expected {expected}"
            ),
            AInftyError::WeightRule { entry } => {
                write!(f, "μ entry {entry} is not weight-homogeneous")
            }
            AInftyError::UnitEntry { entry } => write!(
                f,
                "μ entry {entry} mentions a unit; unit products are canonical and not user data"
            ),
            AInftyError::ArityCap { arity, cap } => {
                write!(f, "μ arity {arity} exceeds the cap {cap}")
            }
            AInftyError::Units(msg) => write!(f, "bad units: {msg}"),
        }
    }
}

impl std::error::Error for AInftyError {}

impl From<GradedError> for AInftyError {
    fn from(e: GradedError) -> Self {
        AInftyError::Graded(e)
    }
}

/// Load-time arity cap: all completeness bounds assume finite `max_arity`.
pub const ARITY_CAP: usize = 12;

/// A strictly unital A∞-algebra over `R = K^m`.
#[derive(Clone, Debug)]
pub struct AInftyAlgebra {
    space: GradedSpace,
    field: Field,
    /// Unit indices, `units[k]` spanning `e_{k+1} A e_{k+1}` in degree 0.
    units: Vec<usize>,
    /// word → (output → coefficient); includes the canonical unit products.
    mu: BTreeMap<Vec<usize>, Combo>,
    max_arity: usize,
}

impl AInftyAlgebra {
    /// Build and validate. `entries` must not mention the units; the strict
    /// unit products are generated here.
    pub fn new(
        space: GradedSpace,
        field: Field,
        unit_ids: &[String],
        entries: Vec<MuEntry>,
    ) -> Result<AInftyAlgebra, AInftyError> {
        let m = space.base().m();
        if unit_ids.len() != m {
            return Err(AInftyError::Units(format!(
                "need exactly {m} units (one per idempotent), got {}",
                unit_ids.len()
            )));
        }
        let mut units = Vec::with_capacity(m);
        for (k, id) in unit_ids.iter().enumerate() {
            let idx = space.index_of(id)?;
            let el = space.element(idx);
            if el.degree != 0 || el.target != el.source || el.target != k + 1 {
                return Err(AInftyError::Units(format!(
                    "unit {id:?} must be a degree-0 element of e_{} A e_{}",
                    k + 1,
                    k + 1
                )));
            }
            if let Some(w) = el.weight {
                if w != 0 {
                    return Err(AInftyError::Units(format!(
                        "unit {id:?} must have weight 0"
                    )));
                }
            }
            units.push(idx);
        }

        let describe = |e: &MuEntry| -> String {
            let word: Vec<&str> = e
                .word
                .iter()
                .rev()
                .map(|&i| space.element(i).id.as_str())
                .collect();
            format!(
                "μ^{}({}) ∋ {}·{}",
                e.word.len(),
                word.join(", "),
                e.coeff,
                space.element(e.output).id
            )
        };

        let fully_weighted = space.basis().iter().all(|el| el.weight.is_some());

        let mut mu: BTreeMap<Vec<usize>, Combo> = BTreeMap::new();
        let mut max_arity = 1;
        for e in &entries {
            let d = e.word.len();
            if d == 0 {
                return Err(AInftyError::EmptyWord);
            }
            if d > ARITY_CAP {
                return Err(AInftyError::ArityCap {
                    arity: d,
                    cap: ARITY_CAP,
                });
            }
            if e.word.iter().any(|i| units.contains(i)) {
                return Err(AInftyError::UnitEntry { entry: describe(e) });
            }
            // Composability right-to-left, plus output endpoints.
            for k in 0..d - 1 {
                if space.element(e.word[k + 1]).source != space.element(e.word[k]).target {
                    return Err(AInftyError::NotComposable { entry: describe(e) });
                }
            }
            let out = space.element(e.output);
            if out.source != space.element(e.word[0]).source
                || out.target != space.element(e.word[d - 1]).target
            {
                return Err(AInftyError::NotComposable { entry: describe(e) });
            }
            let expected = space
                .mode()
                .normalize(e.word.iter().map(|&i| space.degree(i)).sum::<i64>() + 2 - d as i64);
            if out.degree != expected {
                return Err(AInftyError::DegreeRule {
                    entry: describe(e),
                    expected,
                    found: out.degree,
                });
            }
            if fully_weighted {
                let in_w: i64 = e
                    .word
                    .iter()
                    .map(|&i| space.element(i).weight.unwrap())
                    .sum();
                if out.weight.unwrap() != in_w {
                    return Err(AInftyError::WeightRule { entry: describe(e) });
                }
            }
            if e.coeff.is_zero() {
                continue;
            }
            combo::add_term(
                mu.entry(e.word.clone()).or_default(),
                e.output,
                e.coeff.clone(),
            );
            max_arity = max_arity.max(d);
        }
        mu.retain(|_, c| !c.is_empty());

        // Canonical strict-unit products.
        for (k, &e_idx) in units.iter().enumerate() {
            let vertex = k + 1;
            for (a_idx, el) in space.basis().iter().enumerate() {
                // μ²(a, e_vertex) = a when source(a) = vertex.
                if el.source == vertex {
                    let s = field.sign(conventions::unit_right_parity(el.degree));
                    combo::add_term(mu.entry(vec![e_idx, a_idx]).or_default(), a_idx, s);
                }
                // μ²(e_vertex, a) = (−1)^{|a|} a when target(a) = vertex.
                // Skip the diagonal unit itself when both rules would write
                // the same key μ²(e, e): the right rule already did.
                if el.target == vertex && a_idx != e_idx {
                    let s = field.sign(conventions::unit_left_parity(el.degree));
                    combo::add_term(mu.entry(vec![a_idx, e_idx]).or_default(), a_idx, s);
                }
            }
        }

        Ok(AInftyAlgebra {
            space,
            field,
            units,
            mu,
            max_arity,
        })
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity.max(2)
    }

    /// Unit indices, one per idempotent (`units()[k]` at vertex `k+1`).
    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn is_unit(&self, idx: usize) -> bool {
        self.units.contains(&idx)
    }

    /// Indices of the non-unit basis elements (the reduced space `Ā`).
    pub fn reduced_indices(&self) -> Vec<usize> {
        (0..self.space.dim())
            .filter(|i| !self.is_unit(*i))
            .collect()
    }

    /// Apply `μ` to a word (right-to-left storage); `None` means zero.
    pub fn mu(&self, word: &[usize]) -> Option<&Combo> {
        self.mu.get(word)
    }

    /// All stored entries, for serialization and audits.
    pub fn mu_table(&self) -> &BTreeMap<Vec<usize>, Combo> {
        &self.mu
    }

    /// Sum of reduced degrees of a word segment (for Koszul prefixes).
    pub fn reduced_sum(&self, word: &[usize]) -> i64 {
        word_reduced_degree(&self.space, word)
    }

    /// The completeness bound: relations in arities `≤ 2·max_arity − 1`
    /// exhaust all nonvanishing compositions.
    pub fn relation_bound(&self) -> usize {
        2 * self.max_arity() - 1
    }

    /// The A∞-relation residual on one word; empty means the relation holds.
    pub fn relation_residual(&self, word: &[usize]) -> Combo {
        let d = word.len();
        let mut acc: Combo = Combo::new();
        for m in 1..=d {
            for n in 0..=(d - m) {
                let inner = &word[n..n + m];
                let Some(inner_out) = self.mu(inner) else {
                    continue;
                };
                let sign = self
                    .field
                    .sign(conventions::bar_tail_parity(self.reduced_sum(&word[..n])));
                for (&o, c) in inner_out {
                    let mut outer: Vec<usize> = Vec::with_capacity(d - m + 1);
                    outer.extend_from_slice(&word[..n]);
                    outer.push(o);
                    outer.extend_from_slice(&word[n + m..]);
                    if let Some(outer_out) = self.mu(&outer) {
                        let scale = &sign * c;
                        combo::add_scaled(&mut acc, outer_out, &scale);
                    }
                }
            }
        }
        acc
    }
}

/// Outcome of relation checking.
#[derive(Clone, Debug)]
pub struct RelationReport {
    pub pass: bool,
    /// Largest arity checked (`2·max_arity − 1`).
    pub checked_through: usize,
    pub failure: Option<RelationFailure>,
}

/// First failing relation, smallest arity then lexicographically least word.
#[derive(Clone, Debug)]
pub struct RelationFailure {
    pub arity: usize,
    /// Word ids, right-to-left (as stored).
    pub word: Vec<String>,
    pub residual: Vec<(String, Scalar)>,
}

impl AInftyAlgebra {
    /// Check the A∞-relations on every composable word of every arity up to
    /// the completeness bound. Words over the full basis (units included —
    /// the canonical unit products are data too).
    pub fn check_relations(&self) -> RelationReport {
        let bound = self.relation_bound();
        let all: Vec<usize> = (0..self.space.dim()).collect();
        for arity in 1..=bound {
            let words = composable_words(&self.space, &all, arity);
            let failure = words
                .par_iter()
                .filter_map(|w| {
                    let res = self.relation_residual(w);
                    if res.is_empty() {
                        None
                    } else {
                        Some((w.clone(), res))
                    }
                })
                .min_by(|a, b| a.0.cmp(&b.0));
            if let Some((word, residual)) = failure {
                return RelationReport {
                    pass: false,
                    checked_through: bound,
                    failure: Some(RelationFailure {
                        arity,
                        word: word
                            .iter()
                            .map(|&i| self.space.element(i).id.clone())
                            .collect(),
                        residual: residual
                            .into_iter()
                            .map(|(i, s)| (self.space.element(i).id.clone(), s))
                            .collect(),
                    }),
                };
            }
        }
        RelationReport {
            pass: true,
            checked_through: bound,
            failure: None,
        }
    }

    /// Re-derive every canonical sign from the conventions module and compare
    /// with the stored table; any mismatch is reported. Checks: unit products
    /// match the strict-unit rules; `μ¹(e) = 0`; no higher `μ` has a unit slot.
    pub fn opposite_sign_audit(&self) -> SignAuditReport {
        let mut mismatches = Vec::new();
        let mut checked = 0usize;

        let id_of = |i: usize| self.space.element(i).id.clone();

        // Expected unit products.
        for (k, &e_idx) in self.units.iter().enumerate() {
            let vertex = k + 1;
            for (a_idx, el) in self.space.basis().iter().enumerate() {
                if el.source == vertex {
                    checked += 1;
                    let want = self.field.sign(conventions::unit_right_parity(el.degree));
                    let got = self
                        .mu(&[e_idx, a_idx])
                        .and_then(|c| c.get(&a_idx).cloned())
                        .unwrap_or_else(|| self.field.zero());
                    if got != want {
                        mismatches.push(format!(
                            "μ²({}, {}) stored {} expected {}",
                            id_of(a_idx),
                            id_of(e_idx),
                            got,
                            want
                        ));
                    }
                }
                if el.target == vertex {
                    checked += 1;
                    let want = self.field.sign(conventions::unit_left_parity(el.degree));
                    let got = self
                        .mu(&[a_idx, e_idx])
                        .and_then(|c| c.get(&a_idx).cloned())
                        .unwrap_or_else(|| self.field.zero());
                    if got != want {
                        mismatches.push(format!(
                            "μ²({}, {}) stored {} expected {}",
                            id_of(e_idx),
                            id_of(a_idx),
                            got,
                            want
                        ));
                    }
                }
            }
        }

        // μ vanishes on constants; no higher unit entries.
        for (word, out) in &self.mu {
            let has_unit = word.iter().any(|i| self.units.contains(i));
            if !has_unit {
                continue;
            }
            checked += 1;
            if word.len() == 1 {
                mismatches.push(format!("μ¹({}) must vanish", id_of(word[0])));
            } else if word.len() >= 3 {
                let ids: Vec<String> = word.iter().rev().map(|&i| id_of(i)).collect();
                mismatches.push(format!(
                    "μ^{}({}) has a unit slot",
                    word.len(),
                    ids.join(", ")
                ));
            } else {
                // Arity 2 with a unit: outputs must be exactly the canonical
                // single term (checked above); flag any extra outputs.
                let (e_pos, a_pos) = if self.units.contains(&word[0]) {
                    (0, 1)
                } else {
                    (1, 0)
                };
                let _ = e_pos;
                let a_idx = word[a_pos];
                if out.len() != 1 || !out.contains_key(&a_idx) {
                    let ids: Vec<String> = word.iter().rev().map(|&i| id_of(i)).collect();
                    mismatches.push(format!("μ²({}) has non-canonical outputs", ids.join(", ")));
                }
            }
        }

        SignAuditReport {
            checked,
            mismatches,
        }
    }
}

/// Result of the sign audit.
#[derive(Clone, Debug)]
pub struct SignAuditReport {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl SignAuditReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }
}

// --- cohomology-level algebra -------------------------------------------------

/// A class label: (degree, ordinal within that degree's representative list).
pub type ClassId = (i64, usize);

/// The graded associative algebra `H(A)` with its multiplication table.
#[derive(Clone, Debug)]
pub struct CohomologyAlgebra {
    pub dims: BTreeMap<i64, usize>,
    /// Global basis indices of `A` in each degree (the slice coordinates).
    pub degree_basis: BTreeMap<i64, Vec<usize>>,
    /// Representatives as slice-coordinate vectors.
    pub representatives: BTreeMap<i64, Vec<Vec<Scalar>>>,
    /// `[c2]·[c1]` → coordinates in `H^{deg(c1)+deg(c2)}`.
    pub products: BTreeMap<(ClassId, ClassId), Vec<Scalar>>,
    cohomology: BTreeMap<i64, Cohomology>,
    field: Field,
}

impl AInftyAlgebra {
    /// Matrix of `μ¹: A^d → A^{d+1}` in the degree-slice bases.
    fn mu1_matrix(&self, basis_by_degree: &BTreeMap<i64, Vec<usize>>, d: i64) -> SparseMatrix {
        let dom = basis_by_degree.get(&d).map(Vec::as_slice).unwrap_or(&[]);
        let cod = basis_by_degree
            .get(&(d + 1))
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        let mut m = SparseMatrix::new(cod.len(), dom.len(), self.field);
        for (j, &idx) in dom.iter().enumerate() {
            if let Some(out) = self.mu(&[idx]) {
                for (&o, s) in out {
                    let i = cod
                        .iter()
                        .position(|&c| c == o)
                        .expect("μ¹ degree bookkeeping");
                    m.add_to(i, j, s.clone()).unwrap();
                }
            }
        }
        m
    }

    /// The cohomology algebra `H(A)` with products
    /// `[a₂]·[a₁] = (−1)^{|a₁|} [μ²(a₂, a₁)]`.
    pub fn cohomology_algebra(&self) -> Result<CohomologyAlgebra, LinAlgError> {
        let basis_by_degree = self.space.by_degree();
        let mut dims = BTreeMap::new();
        let mut representatives = BTreeMap::new();
        let mut cohomology = BTreeMap::new();
        for (&d, _) in &basis_by_degree {
            let d_in = self.mu1_matrix(&basis_by_degree, d - 1);
            let d_out = self.mu1_matrix(&basis_by_degree, d);
            let h = cohomology_at(&d_in, &d_out)?;
            if h.dim > 0 {
                dims.insert(d, h.dim);
                representatives.insert(d, h.representatives.clone());
            }
            cohomology.insert(d, h);
        }

        // Multiplication table on representatives.
        let mut products = BTreeMap::new();
        let class_ids: Vec<ClassId> = dims
            .iter()
            .flat_map(|(&d, &n)| (0..n).map(move |k| (d, k)))
            .collect();
        for &(d2, k2) in &class_ids {
            for &(d1, k1) in &class_ids {
                let rep2 = &representatives[&d2][k2];
                let rep1 = &representatives[&d1][k1];
                let slice2 = &basis_by_degree[&d2];
                let slice1 = &basis_by_degree[&d1];
                let mut out: Combo = Combo::new();
                for (j2, c2) in rep2.iter().enumerate() {
                    if c2.is_zero() {
                        continue;
                    }
                    for (j1, c1) in rep1.iter().enumerate() {
                        if c1.is_zero() {
                            continue;
                        }
                        // word (a₂, a₁) stored right-to-left: [a₁, a₂].
                        if let Some(prod) = self.mu(&[slice1[j1], slice2[j2]]) {
                            let sign = self
                                .field
                                .sign(conventions::h_product_parity(self.space.degree(slice1[j1])));
                            let scale = &(&sign * c1) * c2;
                            combo::add_scaled(&mut out, prod, &scale);
                        }
                    }
                }
                let dt = self.space.mode().normalize(d1 + d2);
                let coords = match (cohomology.get(&dt), basis_by_degree.get(&dt)) {
                    (Some(h), Some(slice)) => {
                        let mut v = vec![self.field.zero(); slice.len()];
                        for (&i, s) in &out {
                            let pos = slice
                                .iter()
                                .position(|&b| b == i)
                                .expect("product degree bookkeeping");
                            v[pos] = s.clone();
                        }
                        h.project(&v)?
                    }
                    _ => {
                        debug_assert!(out.is_empty());
                        Vec::new()
                    }
                };
                products.insert(((d2, k2), (d1, k1)), coords);
            }
        }

        Ok(CohomologyAlgebra {
            dims,
            degree_basis: basis_by_degree,
            representatives,
            products,
            cohomology,
            field: self.field,
        })
    }
}

impl CohomologyAlgebra {
    /// Coordinates of the class of a cocycle given in slice coordinates.
    pub fn project(&self, degree: i64, v: &[Scalar]) -> Result<Vec<Scalar>, LinAlgError> {
        match self.cohomology.get(&degree) {
            Some(h) => h.project(v),
            None => {
                if v.iter().all(|s| s.is_zero()) {
                    Ok(Vec::new())
                } else {
                    Err(LinAlgError::NotACocycle)
                }
            }
        }
    }

    /// Coordinates of the class of the unit `Σ_k e_k` in degree 0.
    pub fn unit_class(&self, algebra: &AInftyAlgebra) -> Result<Vec<Scalar>, LinAlgError> {
        let slice = self.degree_basis.get(&0).cloned().unwrap_or_default();
        let mut v = vec![self.field.zero(); slice.len()];
        for &u in algebra.units() {
            let pos = slice
                .iter()
                .position(|&b| b == u)
                .expect("unit in degree 0");
            v[pos] = self.field.one();
        }
        self.project(0, &v)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{BaseRing, BasisElement, GradingMode};

    /// Λ(x): exterior algebra on one degree-1 generator; μ²(x, x) = 0.
    fn exterior() -> AInftyAlgebra {
        let space = GradedSpace::new(
            BaseRing::new(1).unwrap(),
            GradingMode::Z,
            vec![
                BasisElement {
                    id: "e".into(),
                    degree: 0,
                    target: 1,
                    source: 1,
                    weight: Some(0),
                },
                BasisElement {
                    id: "x".into(),
                    degree: 1,
                    target: 1,
                    source: 1,
                    weight: Some(1),
                },
            ],
        )
        .unwrap();
        AInftyAlgebra::new(space, Field::Q, &["e".to_string()], vec![]).unwrap()
    }

    #[test]
    fn exterior_relations_pass() {
        let a = exterior();
        let report = a.check_relations();
        assert!(report.pass, "failure: {:?}", report.failure);
        assert_eq!(report.checked_through, 3);
    }

    #[test]
    fn exterior_sign_audit_clean() {
        let a = exterior();
        let audit = a.opposite_sign_audit();
        assert!(audit.pass(), "{:?}", audit.mismatches);
        assert!(audit.checked >= 4);
    }

    #[test]
    fn exterior_cohomology_is_itself() {
        let a = exterior();
        let h = a.cohomology_algebra().unwrap();
        assert_eq!(h.dims.get(&0), Some(&1));
        assert_eq!(h.dims.get(&1), Some(&1));
        assert_eq!(h.total_dim(), 2);
        // [x]·[x] = 0.
        let xx = &h.products[&((1, 0), (1, 0))];
        assert!(xx.is_empty() || xx.iter().all(|s| s.is_zero()));
        // Unit class is there and acts as identity on [x].
        let u = h.unit_class(&a).unwrap();
        assert_eq!(u.len(), 1);
        assert!(u[0].is_one());
        let ex = &h.products[&((0, 0), (1, 0))];
        let xe = &h.products[&((1, 0), (0, 0))];
        assert_eq!(ex, &vec![Field::Q.one()]);
        assert_eq!(xe, &vec![Field::Q.one()]);
    }

    #[test]
    fn mu1_full_rank_summand_dies_in_cohomology() {
        // A = span{e, a, b} with μ¹(a) = b (degrees 0 and 1): H = span{[e]}.
        let space = GradedSpace::new(
            BaseRing::new(1).unwrap(),
            GradingMode::Z,
            vec![
                BasisElement {
                    id: "e".into(),
                    degree: 0,
                    target: 1,
                    source: 1,
                    weight: None,
                },
                BasisElement {
                    id: "a".into(),
                    degree: 0,
                    target: 1,
                    source: 1,
                    weight: None,
                },
                BasisElement {
                    id: "b".into(),
                    degree: 1,
                    target: 1,
                    source: 1,
                    weight: None,
                },
            ],
        )
        .unwrap();
        let a_idx = 1;
        let b_idx = 2;
        let alg = AInftyAlgebra::new(
            space,
            Field::Q,
            &["e".to_string()],
            vec![MuEntry {
                word: vec![a_idx],
                output: b_idx,
                coeff: Field::Q.one(),
            }],
        )
        .unwrap();
        let report = alg.check_relations();
        assert!(report.pass, "failure: {:?}", report.failure);
        let h = alg.cohomology_algebra().unwrap();
        assert_eq!(h.total_dim(), 1);
        assert_eq!(h.dims.get(&0), Some(&1));
    }

    #[test]
    fn degree_rule_is_enforced() {
        let space = GradedSpace::new(
            BaseRing::new(1).unwrap(),
            GradingMode::Z,
            vec![
                BasisElement {
                    id: "e".into(),
                    degree: 0,
                    target: 1,
                    source: 1,
                    weight: None,
                },
                BasisElement {
                    id: "x".into(),
                    degree: 1,
                    target: 1,
                    source: 1,
                    weight: None,
                },
            ],
        )
        .unwrap();
        // μ²(x, x) = x: degree 1 ≠ 1+1+2−2 = 2 → rejected.
        let err = AInftyAlgebra::new(
            space,
            Field::Q,
            &["e".to_string()],
            vec![MuEntry {
                word: vec![1, 1],
                output: 1,
                coeff: Field::Q.one(),
            }],
        )
        .unwrap_err();
        assert!(matches!(err, AInftyError::DegreeRule { .. }));
    }

    #[test]
    fn unit_entries_rejected() {
        let space = GradedSpace::new(
            BaseRing::new(1).unwrap(),
            GradingMode::Z,
            vec![
                BasisElement {
                    id: "e".into(),
                    degree: 0,
                    target: 1,
                    source: 1,
                    weight: None,
                },
                BasisElement {
                    id: "x".into(),
                    degree: 1,
                    target: 1,
                    source: 1,
                    weight: None,
                },
            ],
        )
        .unwrap();
        let err = AInftyAlgebra::new(
            space,
            Field::Q,
            &["e".to_string()],
            vec![MuEntry {
                word: vec![0, 1],
                output: 1,
                coeff: Field::Q.one(),
            }],
        )
        .unwrap_err();
        assert!(matches!(err, AInftyError::UnitEntry { .. }));
    }
}

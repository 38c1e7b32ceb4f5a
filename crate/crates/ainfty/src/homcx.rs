//! Morphisms between A∞-bimodules and the complexes they form.
//!
//! A degree-`g` premorphism `φ: P → Q` between bimodules over one algebra is
//! a family of components `φ^{s;1;r}(a'_s, …, a'_1; p; a_r, …, a_1) ∈ Q`,
//! stored sparsely with the same keys as bimodule structure maps: the
//! `right` word first-applied-first, then the module slot, then the `left`
//! word adjacent-first.  Components are reduced — keys never mention algebra
//! units — and each output must satisfy the degree rule
//! `|φ(…)| = g + Σ‖a‖ + |p|` and match the key's idempotent endpoints.
//!
//! The module provides the differential `δ` (so `δφ = 0` says φ is an honest
//! morphism), composition, the induced map on `μ^{0;1;0}`-cohomology, and
//! [`HomComplex`]: the letter-truncated morphism complex.  Truncation by
//! total letter count is a quotient of the untruncated complex — `δ` never
//! shortens keys — so the truncated differential squares to zero exactly.

use std::collections::BTreeMap;
use std::fmt;

use crate::ainfty::{combo, AInftyAlgebra, Combo};
use crate::bimodule::{AInftyBimodule, BimodKey, LETTER_CAP};
use crate::conventions;
use crate::graded::GradingMode;
use crate::matrix::{
    cohomology_at, rref, vec_ops, Cohomology, ElimOptions, LinAlgError, SparseMatrix,
};
use crate::scalar::{Field, Scalar};
use crate::words::{composable_words_from, composable_words_to, word_reduced_degree};

/// One user-supplied component `φ^{s;1;r}(left; p; right) ∋ coeff·output`.
#[derive(Clone, Debug)]
pub struct HomEntry {
    pub right: Vec<usize>,
    pub p: usize,
    pub left: Vec<usize>,
    pub output: usize,
    pub coeff: Scalar,
}

/// Validation and computation errors for bimodule morphisms.
#[derive(Clone, Debug, PartialEq)]
pub enum HomError {
    /// An index in an entry is out of range for its space.
    IndexOutOfRange {
        entry: String,
    },
    /// Component keys may not mention algebra units.
    UnitEntry {
        entry: String,
    },
    /// Entry whose letters do not compose through the module slot, or whose
    /// output does not match the word's endpoints.
    NotComposable {
        entry: String,
    },
    /// Degree rule `|φ^{s;1;r}(…)| = g + Σ‖a‖ + |p|` violated.
    DegreeRule {
        entry: String,
        expected: i64,
        found: i64,
    },
    /// Too many letters in one entry.
    LetterCap {
        letters: usize,
        cap: usize,
    },
    /// Linear combination of morphisms of different degrees.
    DegreeMismatch {
        left: i64,
        right: i64,
    },
    /// A morphism mentions components beyond the letter cap of a complex.
    CapExceeded {
        letters: usize,
        cap: usize,
    },
    /// A component does not belong to the complex it was handed to.
    Unindexed {
        entry: String,
    },
    Linear(LinAlgError),
}

impl fmt::Display for HomError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomError::IndexOutOfRange { entry } => {
                write!(f, "morphism entry {entry} mentions an out-of-range basis index")
            }
            HomError::UnitEntry { entry } => write!(
                f,
                "morphism entry {entry} mentions a unit; reduced components never do"
            ),
            HomError::NotComposable { entry } => {
                write!(f, "morphism entry {entry} is not idempotent-compatible")
            }
            HomError::DegreeRule {
                entry,
                expected,
                found,
            } => write!(
                f,
                "morphism entry {entry} violates the degree rule: output degree {found}, expected {expected}"
            ),
            HomError::LetterCap { letters, cap } => {
                write!(f, "morphism entry with {letters} letters exceeds the cap {cap}")
            }
            HomError::DegreeMismatch { left, right } => {
                write!(f, "cannot combine morphisms of degrees {left} and {right}")
            }
            HomError::CapExceeded { letters, cap } => write!(
                f,
                "morphism has a component with {letters} letters, beyond the complex cap {cap}"
            ),
            HomError::Unindexed { entry } => {
                write!(f, "component {entry} does not belong to this complex")
            }
            HomError::Linear(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for HomError {}

impl From<LinAlgError> for HomError {
    fn from(e: LinAlgError) -> Self {
        HomError::Linear(e)
    }
}

/// A graded premorphism between two bimodules over the same algebra.
///
/// The source and target bimodules are not stored; every operation that
/// needs them takes them as arguments, mirroring how bimodules borrow their
/// algebra.  Whether `φ` is an honest morphism is the condition `δφ = 0`,
/// checked by [`BimoduleHom::is_closed`].
#[derive(Clone, Debug, PartialEq)]
pub struct BimoduleHom {
    degree: i64,
    field: Field,
    entries: BTreeMap<BimodKey, Combo>,
}

impl BimoduleHom {
    /// Validate components and build the morphism.
    pub fn new(
        algebra: &AInftyAlgebra,
        source: &AInftyBimodule,
        target: &AInftyBimodule,
        degree: i64,
        entries: Vec<HomEntry>,
    ) -> Result<Self, HomError> {
        let aspace = algebra.space();
        let pspace = source.space();
        let qspace = target.space();
        let mode = pspace.mode();
        let degree = mode.normalize(degree);

        let mut map: BTreeMap<BimodKey, Combo> = BTreeMap::new();
        for e in entries {
            let key = BimodKey {
                right: e.right,
                p: e.p,
                left: e.left,
            };
            if key.p >= pspace.dim()
                || e.output >= qspace.dim()
                || key
                    .right
                    .iter()
                    .chain(&key.left)
                    .any(|&a| a >= aspace.dim())
            {
                return Err(HomError::IndexOutOfRange {
                    entry: format!("with module index {} / output {}", key.p, e.output),
                });
            }
            let describe = || key.describe(aspace, pspace);
            if key.letters() > LETTER_CAP {
                return Err(HomError::LetterCap {
                    letters: key.letters(),
                    cap: LETTER_CAP,
                });
            }
            if key
                .right
                .iter()
                .chain(&key.left)
                .any(|&a| algebra.is_unit(a))
            {
                return Err(HomError::UnitEntry { entry: describe() });
            }
            if !AInftyBimodule::composable(aspace, pspace, &key)
                || qspace.element(e.output).target
                    != AInftyBimodule::word_target(aspace, pspace, &key)
                || qspace.element(e.output).source
                    != AInftyBimodule::word_source(aspace, pspace, &key)
            {
                return Err(HomError::NotComposable { entry: describe() });
            }
            let red: i64 = key
                .right
                .iter()
                .chain(&key.left)
                .map(|&a| aspace.reduced_degree(a))
                .sum();
            let expected = mode.normalize(degree + red + pspace.degree(key.p));
            let found = qspace.degree(e.output);
            if found != expected {
                return Err(HomError::DegreeRule {
                    entry: describe(),
                    expected,
                    found,
                });
            }
            let slot = map.entry(key).or_default();
            combo::add_term(slot, e.output, e.coeff);
        }
        map.retain(|_, c| !c.is_empty());

        Ok(BimoduleHom {
            degree,
            field: algebra.field(),
            entries: map,
        })
    }

    /// The zero morphism of the given degree.
    pub fn zero(field: Field, degree: i64) -> Self {
        BimoduleHom {
            degree,
            field,
            entries: BTreeMap::new(),
        }
    }

    /// The identity morphism of a bimodule: the single component
    /// `φ^{0;1;0}(p) = p`.
    pub fn identity(module: &AInftyBimodule) -> Self {
        let mut entries = BTreeMap::new();
        for p in 0..module.space().dim() {
            let key = BimodKey {
                right: vec![],
                p,
                left: vec![],
            };
            let mut c = Combo::new();
            combo::add_term(&mut c, p, module.field().one());
            entries.insert(key, c);
        }
        BimoduleHom {
            degree: 0,
            field: module.field(),
            entries,
        }
    }

    pub(crate) fn from_map(field: Field, degree: i64, entries: BTreeMap<BimodKey, Combo>) -> Self {
        BimoduleHom {
            degree,
            field,
            entries,
        }
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn entries(&self) -> &BTreeMap<BimodKey, Combo> {
        &self.entries
    }

    /// One component, if stored.
    pub fn component(&self, key: &BimodKey) -> Option<&Combo> {
        self.entries.get(key)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest `r + s` over stored components.
    pub fn max_letters(&self) -> usize {
        self.entries
            .keys()
            .map(BimodKey::letters)
            .max()
            .unwrap_or(0)
    }

    /// `s · φ`.
    pub fn scale(&self, s: &Scalar) -> Self {
        let mut entries = BTreeMap::new();
        if !s.is_zero() {
            for (k, v) in &self.entries {
                let mut c = Combo::new();
                combo::add_scaled(&mut c, v, s);
                entries.insert(k.clone(), c);
            }
        }
        BimoduleHom {
            degree: self.degree,
            field: self.field,
            entries,
        }
    }

    /// `φ + ψ`; both must have the same degree.
    pub fn add(&self, other: &Self) -> Result<Self, HomError> {
        if self.degree != other.degree {
            return Err(HomError::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        let mut entries = self.entries.clone();
        for (k, v) in &other.entries {
            let slot = entries.entry(k.clone()).or_default();
            combo::add_scaled(slot, v, &self.field.one());
        }
        entries.retain(|_, c| !c.is_empty());
        Ok(BimoduleHom {
            degree: self.degree,
            field: self.field,
            entries,
        })
    }

    /// `φ − ψ`.
    pub fn sub(&self, other: &Self) -> Result<Self, HomError> {
        self.add(&other.scale(&self.field.sign(1)))
    }

    /// The morphism differential `δφ`, a degree-`g+1` premorphism.
    ///
    /// `δφ` collects the outer target operations applied after φ, minus —
    /// globally signed by the degree of φ — the inner source operations and
    /// the algebra operations inserted into either word, each with its bar
    /// prefix sign.  Outputs whose keys would mention a unit are dropped;
    /// that is the reduced model's quotient differential.
    pub fn delta(
        &self,
        algebra: &AInftyAlgebra,
        source: &AInftyBimodule,
        target: &AInftyBimodule,
    ) -> Self {
        let mode = source.space().mode();
        BimoduleHom::from_map(
            self.field,
            mode.normalize(self.degree + 1),
            delta_map(algebra, source, target, self.degree, &self.entries),
        )
    }

    /// Value of `δφ` on one key, evaluated by splitting the key rather than
    /// by assembling table products.  Independent of [`BimoduleHom::delta`];
    /// the two are cross-checked in tests.
    pub fn delta_component(
        &self,
        algebra: &AInftyAlgebra,
        source: &AInftyBimodule,
        target: &AInftyBimodule,
        key: &BimodKey,
    ) -> Combo {
        let aspace = algebra.space();
        let field = self.field;
        let right = &key.right;
        let left = &key.left;
        let r = right.len();
        let s = left.len();
        let mut acc = Combo::new();

        // Outer target operation applied after an inner φ block.
        for i in 0..=r {
            for j in 0..=s {
                let inner = BimodKey {
                    right: right[i..].to_vec(),
                    p: key.p,
                    left: left[..j].to_vec(),
                };
                let Some(vphi) = self.entries.get(&inner) else {
                    continue;
                };
                let sign = field.sign(conventions::hom_diff_outer_parity(
                    self.degree,
                    word_reduced_degree(aspace, &right[..i]),
                ));
                for (&q, c) in vphi {
                    let outer = BimodKey {
                        right: right[..i].to_vec(),
                        p: q,
                        left: left[j..].to_vec(),
                    };
                    let Some(vmu) = target.mu(&outer) else {
                        continue;
                    };
                    combo::add_scaled(&mut acc, vmu, &(&sign * c));
                }
            }
        }

        // φ applied after an inner source-module operation.
        for i in 0..=r {
            for j in 0..=s {
                let inner = BimodKey {
                    right: right[i..].to_vec(),
                    p: key.p,
                    left: left[..j].to_vec(),
                };
                let Some(vmu) = source.mu(&inner) else {
                    continue;
                };
                let sign = field.sign(
                    conventions::hom_diff_inner_parity(self.degree)
                        + conventions::bar_tail_parity(word_reduced_degree(aspace, &right[..i])),
                );
                for (&pmid, c) in vmu {
                    let outer = BimodKey {
                        right: right[..i].to_vec(),
                        p: pmid,
                        left: left[j..].to_vec(),
                    };
                    let Some(vphi) = self.entries.get(&outer) else {
                        continue;
                    };
                    combo::add_scaled(&mut acc, vphi, &(&sign * c));
                }
            }
        }

        // φ applied after an algebra operation inside the right word.
        for i in 0..r {
            for j in 1..=(r - i) {
                let Some(vals) = algebra.mu(&right[i..i + j]) else {
                    continue;
                };
                let sign = field.sign(
                    conventions::hom_diff_inner_parity(self.degree)
                        + conventions::bar_tail_parity(word_reduced_degree(aspace, &right[..i])),
                );
                for (&b, c) in vals {
                    let mut new_right = right[..i].to_vec();
                    new_right.push(b);
                    new_right.extend_from_slice(&right[i + j..]);
                    let probe = BimodKey {
                        right: new_right,
                        p: key.p,
                        left: left.clone(),
                    };
                    let Some(vphi) = self.entries.get(&probe) else {
                        continue;
                    };
                    combo::add_scaled(&mut acc, vphi, &(&sign * c));
                }
            }
        }

        // φ applied after an algebra operation inside the left word.
        let right_red = word_reduced_degree(aspace, right);
        let deg_p = source.space().degree(key.p);
        for i in 0..s {
            for j in 1..=(s - i) {
                let Some(vals) = algebra.mu(&left[i..i + j]) else {
                    continue;
                };
                let sign = field.sign(
                    conventions::hom_diff_inner_parity(self.degree)
                        + conventions::module_left_insert_parity(
                            right_red,
                            deg_p,
                            word_reduced_degree(aspace, &left[..i]),
                        ),
                );
                for (&b, c) in vals {
                    let mut new_left = left[..i].to_vec();
                    new_left.push(b);
                    new_left.extend_from_slice(&left[i + j..]);
                    let probe = BimodKey {
                        right: right.clone(),
                        p: key.p,
                        left: new_left,
                    };
                    let Some(vphi) = self.entries.get(&probe) else {
                        continue;
                    };
                    combo::add_scaled(&mut acc, vphi, &(&sign * c));
                }
            }
        }

        acc
    }

    /// Whether `δφ = 0`, i.e. φ is an honest morphism.
    pub fn is_closed(
        &self,
        algebra: &AInftyAlgebra,
        source: &AInftyBimodule,
        target: &AInftyBimodule,
    ) -> bool {
        self.delta(algebra, source, target).is_zero()
    }

    /// Composition `after ∘ before`.
    ///
    /// The outer morphism consumes the first-applied right prefix and the
    /// outermost left suffix, with the inner morphism's value in its module
    /// slot; passing the inner morphism across the prefix costs its degree
    /// times the prefix's bar degree.
    pub fn compose(algebra: &AInftyAlgebra, after: &Self, before: &Self) -> Self {
        let aspace = algebra.space();
        let field = after.field;
        let mut after_by_p: BTreeMap<usize, Vec<(&BimodKey, &Combo)>> = BTreeMap::new();
        for (k, v) in &after.entries {
            after_by_p.entry(k.p).or_default().push((k, v));
        }
        let mut entries: BTreeMap<BimodKey, Combo> = BTreeMap::new();
        for (kb, vb) in &before.entries {
            for (&q, c) in vb {
                let Some(rows) = after_by_p.get(&q) else {
                    continue;
                };
                for (ka, va) in rows {
                    let sign = field.sign(conventions::compose_parity(
                        before.degree,
                        word_reduced_degree(aspace, &ka.right),
                    ));
                    let key = BimodKey {
                        right: [ka.right.as_slice(), kb.right.as_slice()].concat(),
                        p: kb.p,
                        left: [kb.left.as_slice(), ka.left.as_slice()].concat(),
                    };
                    let slot = entries.entry(key).or_default();
                    combo::add_scaled(slot, va, &(&sign * c));
                }
            }
        }
        entries.retain(|_, c| !c.is_empty());
        BimoduleHom {
            degree: aspace.mode().normalize(after.degree + before.degree),
            field,
            entries,
        }
    }

    /// The induced map `H^*(P) → H^{*+g}(Q)` on `μ^{0;1;0}`-cohomology:
    /// `[p] ↦ (−1)^{g·|p|} [φ^{0;1;0}(p)]`.
    ///
    /// Requires the letter-free part of `δφ` to vanish (true for any cocycle
    /// of a truncated complex); errors with a non-cocycle witness otherwise.
    pub fn h_level(
        &self,
        algebra: &AInftyAlgebra,
        source: &AInftyBimodule,
        target: &AInftyBimodule,
    ) -> Result<HLevelMap, HomError> {
        let mode = source.space().mode();
        let hp = source.h_module(algebra)?;
        let hq = target.h_module(algebra)?;
        let field = self.field;
        let mut blocks = BTreeMap::new();
        for (&d, &n) in &hp.dims {
            let out_deg = mode.normalize(d + self.degree);
            let rows = hq.dims.get(&out_deg).copied().unwrap_or(0);
            let mut m = SparseMatrix::new(rows, n, field);
            let p_slice = &hp.degree_basis[&d];
            let q_slice = hq
                .degree_basis
                .get(&out_deg)
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            let sign = field.sign(conventions::h_level_parity(self.degree, d));
            for k in 0..n {
                let rep = hp.representative(d, k).expect("class index in range");
                let mut w = vec_ops::zero(q_slice.len(), field);
                for (pos, &pidx) in p_slice.iter().enumerate() {
                    let c = &rep[pos];
                    if c.is_zero() {
                        continue;
                    }
                    let key = BimodKey {
                        right: vec![],
                        p: pidx,
                        left: vec![],
                    };
                    let Some(v) = self.entries.get(&key) else {
                        continue;
                    };
                    for (&oq, sc) in v {
                        let qpos = q_slice
                            .iter()
                            .position(|&x| x == oq)
                            .expect("output degree bookkeeping");
                        w[qpos] = &w[qpos] + &(&(c * sc) * &sign);
                    }
                }
                let class = hq.project(out_deg, &w)?;
                for (i, val) in class.into_iter().enumerate() {
                    if !val.is_zero() {
                        m.set(i, k, val)?;
                    }
                }
            }
            blocks.insert(d, m);
        }
        Ok(HLevelMap {
            degree: self.degree,
            mode,
            source_dims: hp.dims.clone(),
            target_dims: hq.dims.clone(),
            blocks,
        })
    }
}

/// Forward assembly of `δφ` from the stored operation tables.
fn delta_map(
    algebra: &AInftyAlgebra,
    source: &AInftyBimodule,
    target: &AInftyBimodule,
    degree: i64,
    entries: &BTreeMap<BimodKey, Combo>,
) -> BTreeMap<BimodKey, Combo> {
    let aspace = algebra.space();
    let field = algebra.field();
    let unit_free =
        |right: &[usize], left: &[usize]| !right.iter().chain(left).any(|&a| algebra.is_unit(a));

    // Target components by module slot, for the outer family.
    let mut target_by_p: BTreeMap<usize, Vec<(&BimodKey, &Combo)>> = BTreeMap::new();
    for (k, v) in target.mu_table() {
        if unit_free(&k.right, &k.left) {
            target_by_p.entry(k.p).or_default().push((k, v));
        }
    }
    // φ components by module slot, for the inner source family.
    let mut phi_by_p: BTreeMap<usize, Vec<(&BimodKey, &Combo)>> = BTreeMap::new();
    for (k, v) in entries {
        phi_by_p.entry(k.p).or_default().push((k, v));
    }
    // Algebra operations by output letter, for the insertion families.
    // Unit outputs are dropped: a key mentioning a unit leaves the reduced
    // model, and φ vanishes there.
    let mut mu_by_output: BTreeMap<usize, Vec<(&[usize], &Scalar)>> = BTreeMap::new();
    for (w, v) in algebra.mu_table() {
        if w.iter().any(|&a| algebra.is_unit(a)) {
            continue;
        }
        for (&b, c) in v {
            if !algebra.is_unit(b) {
                mu_by_output.entry(b).or_default().push((w, c));
            }
        }
    }

    let mut out: BTreeMap<BimodKey, Combo> = BTreeMap::new();

    // Outer target operation applied after φ.
    for (kphi, vphi) in entries {
        for (&q, cq) in vphi {
            let Some(rows) = target_by_p.get(&q) else {
                continue;
            };
            for (kmu, vmu) in rows {
                let sign = field.sign(conventions::hom_diff_outer_parity(
                    degree,
                    word_reduced_degree(aspace, &kmu.right),
                ));
                let key = BimodKey {
                    right: [kmu.right.as_slice(), kphi.right.as_slice()].concat(),
                    p: kphi.p,
                    left: [kphi.left.as_slice(), kmu.left.as_slice()].concat(),
                };
                let slot = out.entry(key).or_default();
                combo::add_scaled(slot, vmu, &(&sign * cq));
            }
        }
    }

    // φ applied after an inner source-module operation.
    for (kmu, vmu) in source.mu_table() {
        if !unit_free(&kmu.right, &kmu.left) {
            continue;
        }
        for (&pmid, cmu) in vmu {
            let Some(rows) = phi_by_p.get(&pmid) else {
                continue;
            };
            for (kphi, vphi) in rows {
                let sign = field.sign(
                    conventions::hom_diff_inner_parity(degree)
                        + conventions::bar_tail_parity(word_reduced_degree(aspace, &kphi.right)),
                );
                let key = BimodKey {
                    right: [kphi.right.as_slice(), kmu.right.as_slice()].concat(),
                    p: kmu.p,
                    left: [kmu.left.as_slice(), kphi.left.as_slice()].concat(),
                };
                let slot = out.entry(key).or_default();
                combo::add_scaled(slot, vphi, &(&sign * cmu));
            }
        }
    }

    // φ applied after an algebra operation inserted into the right word.
    for (kphi, vphi) in entries {
        for (t, b) in kphi.right.iter().enumerate() {
            let Some(rows) = mu_by_output.get(b) else {
                continue;
            };
            let sign = field.sign(
                conventions::hom_diff_inner_parity(degree)
                    + conventions::bar_tail_parity(word_reduced_degree(aspace, &kphi.right[..t])),
            );
            for (w, cw) in rows {
                let mut right = kphi.right[..t].to_vec();
                right.extend_from_slice(w);
                right.extend_from_slice(&kphi.right[t + 1..]);
                let key = BimodKey {
                    right,
                    p: kphi.p,
                    left: kphi.left.clone(),
                };
                let slot = out.entry(key).or_default();
                combo::add_scaled(slot, vphi, &(&sign * cw));
            }
        }
    }

    // φ applied after an algebra operation inserted into the left word.
    for (kphi, vphi) in entries {
        let base = word_reduced_degree(aspace, &kphi.right) + source.space().degree(kphi.p);
        for (t, b) in kphi.left.iter().enumerate() {
            let Some(rows) = mu_by_output.get(b) else {
                continue;
            };
            let sign = field.sign(
                conventions::hom_diff_inner_parity(degree)
                    + base
                    + conventions::bar_tail_parity(word_reduced_degree(aspace, &kphi.left[..t])),
            );
            for (w, cw) in rows {
                let mut left = kphi.left[..t].to_vec();
                left.extend_from_slice(w);
                left.extend_from_slice(&kphi.left[t + 1..]);
                let key = BimodKey {
                    right: kphi.right.clone(),
                    p: kphi.p,
                    left,
                };
                let slot = out.entry(key).or_default();
                combo::add_scaled(slot, vphi, &(&sign * cw));
            }
        }
    }

    out.retain(|_, c| !c.is_empty());
    out
}

/// All reduced component slots `(key, output, degree)` with at most `cap`
/// letters, in deterministic order.
pub(crate) fn hom_basis_pairs(
    algebra: &AInftyAlgebra,
    source: &AInftyBimodule,
    target: &AInftyBimodule,
    cap: usize,
) -> Vec<(BimodKey, usize, i64)> {
    let aspace = algebra.space();
    let pspace = source.space();
    let qspace = target.space();
    let mode = pspace.mode();
    let reduced = algebra.reduced_indices();
    let mut out = Vec::new();
    for p in 0..pspace.dim() {
        let pel_source = pspace.element(p).source;
        let pel_target = pspace.element(p).target;
        let pdeg = pspace.degree(p);
        for r in 0..=cap {
            for right in composable_words_to(aspace, &reduced, r, pel_source) {
                for s in 0..=(cap - r) {
                    for left in composable_words_from(aspace, &reduced, s, pel_target) {
                        let key = BimodKey {
                            right: right.clone(),
                            p,
                            left,
                        };
                        let ws = AInftyBimodule::word_source(aspace, pspace, &key);
                        let wt = AInftyBimodule::word_target(aspace, pspace, &key);
                        let red: i64 = key
                            .right
                            .iter()
                            .chain(&key.left)
                            .map(|&a| aspace.reduced_degree(a))
                            .sum();
                        for q in 0..qspace.dim() {
                            let qel = qspace.element(q);
                            if qel.source != ws || qel.target != wt {
                                continue;
                            }
                            let g = mode.normalize(qel.degree - red - pdeg);
                            out.push((key.clone(), q, g));
                        }
                    }
                }
            }
        }
    }
    out
}

/// The induced map on `μ^{0;1;0}`-cohomology, one matrix per source degree.
#[derive(Clone, Debug)]
pub struct HLevelMap {
    pub degree: i64,
    mode: GradingMode,
    pub source_dims: BTreeMap<i64, usize>,
    pub target_dims: BTreeMap<i64, usize>,
    /// Keyed by source degree `d`; block maps `H^d` of the source to
    /// `H^{d+degree}` of the target, columns indexed by source classes.
    pub blocks: BTreeMap<i64, SparseMatrix>,
}

impl HLevelMap {
    /// Target degree hit by source degree `d`.
    pub fn out_degree(&self, d: i64) -> i64 {
        self.mode.normalize(d + self.degree)
    }

    pub fn block(&self, d: i64) -> Option<&SparseMatrix> {
        self.blocks.get(&d)
    }

    /// Whether every block is square and invertible and the total
    /// dimensions agree.
    pub fn is_iso(&self) -> bool {
        let tot_s: usize = self.source_dims.values().sum();
        let tot_t: usize = self.target_dims.values().sum();
        if tot_s != tot_t {
            return false;
        }
        for (&d, &n) in &self.source_dims {
            let Some(b) = self.blocks.get(&d) else {
                return false;
            };
            if b.rows() != n || b.cols() != n {
                return false;
            }
            if rref(b, false, &ElimOptions::default()).rank() != n {
                return false;
            }
        }
        true
    }

    /// Whether every cohomology class of the target is hit: each nonzero
    /// target degree receives a block of full row rank.
    pub fn is_surjective(&self) -> bool {
        for (&e, &n) in &self.target_dims {
            if n == 0 {
                continue;
            }
            let found = self.source_dims.keys().find(|&&d| self.out_degree(d) == e);
            let Some(&d) = found else {
                return false;
            };
            let Some(b) = self.blocks.get(&d) else {
                return false;
            };
            if b.rows() != n || rref(b, false, &ElimOptions::default()).rank() != n {
                return false;
            }
        }
        true
    }

    /// Whether the map is the identity (degree 0, equal dims, unit blocks).
    pub fn is_identity(&self) -> bool {
        self.degree == 0
            && self.source_dims == self.target_dims
            && self.source_dims.iter().all(|(&d, &n)| {
                self.blocks.get(&d).is_some_and(|b| {
                    b.rows() == n
                        && b.cols() == n
                        && b.sub(&SparseMatrix::identity(n, b.field()))
                            .map(|m| m.is_zero())
                            .unwrap_or(false)
                })
            })
    }
}

/// Whether `f: X → Y` and `g: Y → X` are closed morphisms that invert each
/// other on cohomology: both composites must induce the identity.
pub fn verify_inverse_pair(
    algebra: &AInftyAlgebra,
    x: &AInftyBimodule,
    y: &AInftyBimodule,
    f: &BimoduleHom,
    g: &BimoduleHom,
) -> Result<bool, HomError> {
    if !f.is_closed(algebra, x, y) || !g.is_closed(algebra, y, x) {
        return Ok(false);
    }
    let gf = BimoduleHom::compose(algebra, g, f);
    let fg = BimoduleHom::compose(algebra, f, g);
    Ok(gf.h_level(algebra, x, x)?.is_identity() && fg.h_level(algebra, y, y)?.is_identity())
}

/// The morphism complex between two bimodules, truncated to components with
/// at most `cap` letters.
///
/// Since the differential never decreases the letter count, components
/// beyond the cap span a subcomplex and the truncation is the quotient by
/// it; its differential squares to zero exactly, and cohomology is computed
/// with exact arithmetic.  `stabilized` records whether the cohomology
/// dimensions agree with the cap-`cap−1` truncation (`false` at cap 0).
pub struct HomComplex {
    field: Field,
    cap: usize,
    basis: BTreeMap<i64, Vec<(BimodKey, usize)>>,
    index: BTreeMap<(BimodKey, usize), (i64, usize)>,
    diffs: BTreeMap<i64, SparseMatrix>,
    cohomology: BTreeMap<i64, Cohomology>,
    /// Cohomology dimension per degree (degrees with dimension 0 omitted).
    pub dims: BTreeMap<i64, usize>,
    /// Whether dims agree between caps `cap−1` and `cap`.
    pub stabilized: bool,
}

impl HomComplex {
    pub fn new(
        algebra: &AInftyAlgebra,
        source: &AInftyBimodule,
        target: &AInftyBimodule,
        cap: usize,
    ) -> Result<Self, HomError> {
        let mut cx = Self::build(algebra, source, target, cap)?;
        if cap > 0 {
            let prev = Self::build(algebra, source, target, cap - 1)?;
            cx.stabilized = cx.dims == prev.dims;
        }
        Ok(cx)
    }

    fn build(
        algebra: &AInftyAlgebra,
        source: &AInftyBimodule,
        target: &AInftyBimodule,
        cap: usize,
    ) -> Result<Self, HomError> {
        let field = algebra.field();
        let mode = source.space().mode();

        let mut basis: BTreeMap<i64, Vec<(BimodKey, usize)>> = BTreeMap::new();
        for (key, q, g) in hom_basis_pairs(algebra, source, target, cap) {
            basis.entry(g).or_default().push((key, q));
        }
        let mut index: BTreeMap<(BimodKey, usize), (i64, usize)> = BTreeMap::new();
        for (&g, pairs) in &basis {
            for (i, pair) in pairs.iter().enumerate() {
                index.insert(pair.clone(), (g, i));
            }
        }

        let mut diffs: BTreeMap<i64, SparseMatrix> = BTreeMap::new();
        for (&g, pairs) in &basis {
            let out_deg = mode.normalize(g + 1);
            let rows = basis.get(&out_deg).map_or(0, Vec::len);
            let mut m = SparseMatrix::new(rows, pairs.len(), field);
            for (j, (key, q)) in pairs.iter().enumerate() {
                let mut single = Combo::new();
                combo::add_term(&mut single, *q, field.one());
                let mut one_entry = BTreeMap::new();
                one_entry.insert(key.clone(), single);
                let image = delta_map(algebra, source, target, g, &one_entry);
                for (okey, vals) in image {
                    if okey.letters() > cap {
                        continue;
                    }
                    for (oq, c) in vals {
                        let &(dg, i) = index
                            .get(&(okey.clone(), oq))
                            .expect("differential output within the cap is a basis pair");
                        debug_assert_eq!(dg, out_deg);
                        m.add_to(i, j, c)?;
                    }
                }
            }
            diffs.insert(g, m);
        }

        let mut cohomology = BTreeMap::new();
        let mut dims = BTreeMap::new();
        for (&g, pairs) in &basis {
            let n = pairs.len();
            let in_deg = mode.normalize(g - 1);
            let d_in = match diffs.get(&in_deg) {
                Some(m) if m.rows() == n => m.clone(),
                _ => SparseMatrix::new(n, 0, field),
            };
            let d_out = diffs[&g].clone();
            let h = cohomology_at(&d_in, &d_out)?;
            if h.dim > 0 {
                dims.insert(g, h.dim);
            }
            cohomology.insert(g, h);
        }

        Ok(HomComplex {
            field,
            cap,
            basis,
            index,
            diffs,
            cohomology,
            dims,
            stabilized: false,
        })
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Dimension of the truncated complex in one degree.
    pub fn dim_at(&self, g: i64) -> usize {
        self.basis.get(&g).map_or(0, Vec::len)
    }

    /// Basis pairs `(key, output)` of one degree slice.
    pub fn basis_at(&self, g: i64) -> &[(BimodKey, usize)] {
        self.basis.get(&g).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Position of a component slot in its degree slice.
    pub fn position_of(&self, key: &BimodKey, output: usize) -> Option<(i64, usize)> {
        self.index.get(&(key.clone(), output)).copied()
    }

    /// The truncated differential leaving degree `g`.
    pub fn diff(&self, g: i64) -> Option<&SparseMatrix> {
        self.diffs.get(&g)
    }

    /// Cohomology dimension at one degree.
    pub fn cohomology_rank(&self, g: i64) -> usize {
        self.dims.get(&g).copied().unwrap_or(0)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    /// The `k`-th chosen representative of `H^g`, as a morphism.
    pub fn representative_hom(&self, g: i64, k: usize) -> Option<BimoduleHom> {
        let h = self.cohomology.get(&g)?;
        let rep = h.representatives.get(k)?;
        let pairs = self.basis.get(&g)?;
        let mut entries: BTreeMap<BimodKey, Combo> = BTreeMap::new();
        for (pos, c) in rep.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (key, q) = &pairs[pos];
            let slot = entries.entry(key.clone()).or_default();
            combo::add_term(slot, *q, c.clone());
        }
        Some(BimoduleHom::from_map(self.field, g, entries))
    }

    /// Class coordinates of a cocycle morphism in the representative basis
    /// of `H^{deg φ}`.
    pub fn class_of(&self, phi: &BimoduleHom) -> Result<Vec<Scalar>, HomError> {
        let g = phi.degree;
        let n = self.dim_at(g);
        let mut v = vec_ops::zero(n, self.field);
        for (key, vals) in &phi.entries {
            if key.letters() > self.cap {
                return Err(HomError::CapExceeded {
                    letters: key.letters(),
                    cap: self.cap,
                });
            }
            for (&q, c) in vals {
                let Some(&(dg, i)) = self.index.get(&(key.clone(), q)) else {
                    return Err(HomError::Unindexed {
                        entry: format!("with module index {} / output {q}", key.p),
                    });
                };
                if dg != g {
                    return Err(HomError::Unindexed {
                        entry: format!("with module index {} / output {q}", key.p),
                    });
                }
                v[i] = &v[i] + c;
            }
        }
        match self.cohomology.get(&g) {
            Some(h) => Ok(h.project(&v)?),
            None => {
                if vec_ops::is_zero(&v) {
                    Ok(Vec::new())
                } else {
                    Err(HomError::Linear(LinAlgError::NotACocycle))
                }
            }
        }
    }

    /// Whether the class of a cocycle morphism vanishes.
    pub fn class_is_zero(&self, phi: &BimoduleHom) -> Result<bool, HomError> {
        Ok(self.class_of(phi)?.iter().all(Scalar::is_zero))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scalar::Field;

    /// The fixture sweep used throughout: algebra plus (source, target)
    /// bimodule pairs with distinct sign behavior.
    fn sweep() -> Vec<(AInftyAlgebra, AInftyBimodule, AInftyBimodule)> {
        let mut out = Vec::new();

        let ext = fixtures::exterior(Field::Q);
        let diag = AInftyBimodule::diagonal(&ext);
        let scaled = fixtures::scaled_module(&ext, Field::Q.from_int(2));
        out.push((ext.clone(), diag.clone(), diag.clone()));
        out.push((ext.clone(), scaled, diag.clone()));
        out.push((ext.clone(), diag.clone(), diag.shift_by(&ext, 1)));
        out.push((ext.clone(), diag.dual(&ext), diag));

        let q2 = fixtures::cyclic_quiver(2, Field::Q, &fixtures::quiver_default_degrees(2));
        let d2 = AInftyBimodule::diagonal(&q2);
        out.push((q2, d2.clone(), d2));

        let dq = fixtures::deformed_quiver(2, Field::Q);
        let dd = AInftyBimodule::diagonal(&dq);
        out.push((dq.clone(), dd.clone(), dd.clone()));
        out.push((
            dq,
            dd.clone(),
            dd.dual(&fixtures::deformed_quiver(2, Field::Q)),
        ));

        out
    }

    fn single(field: Field, degree: i64, key: &BimodKey, q: usize) -> BimoduleHom {
        let mut c = Combo::new();
        combo::add_term(&mut c, q, field.one());
        let mut entries = BTreeMap::new();
        entries.insert(key.clone(), c);
        BimoduleHom::from_map(field, degree, entries)
    }

    #[test]
    fn forward_and_split_evaluations_agree() {
        for (algebra, source, target) in sweep() {
            let reach = algebra.max_arity() - 1;
            let reach = reach.max(source.max_letters()).max(target.max_letters());
            let candidates: std::collections::BTreeSet<BimodKey> =
                hom_basis_pairs(&algebra, &source, &target, 2 + reach)
                    .into_iter()
                    .map(|(k, _, _)| k)
                    .collect();
            for (key, q, g) in hom_basis_pairs(&algebra, &source, &target, 2) {
                let phi = single(algebra.field(), g, &key, q);
                let fwd = phi.delta(&algebra, &source, &target);
                // Every forward component lands inside the candidate set.
                for okey in fwd.entries().keys() {
                    assert!(okey.letters() <= key.letters() + reach);
                    assert!(
                        candidates.contains(okey),
                        "forward support escaped the enumeration: {okey:?}"
                    );
                }
                // Split evaluation agrees on every candidate key.
                for okey in &candidates {
                    let eval = phi.delta_component(&algebra, &source, &target, okey);
                    let found = fwd.component(okey).cloned().unwrap_or_default();
                    assert_eq!(eval, found, "key {okey:?} from {key:?} -> {q}");
                }
            }
        }
    }

    #[test]
    fn differential_squares_to_zero() {
        for (algebra, source, target) in sweep() {
            for (key, q, g) in hom_basis_pairs(&algebra, &source, &target, 2) {
                let phi = single(algebra.field(), g, &key, q);
                let dd = phi
                    .delta(&algebra, &source, &target)
                    .delta(&algebra, &source, &target);
                assert!(
                    dd.is_zero(),
                    "δ² ≠ 0 on {key:?} -> {q} (degree {g}): {:?}",
                    dd.entries()
                );
            }
        }
    }

    #[test]
    fn identity_is_closed_and_neutral() {
        for (algebra, module) in [
            (fixtures::exterior(Field::Q), None),
            (fixtures::deformed_quiver(2, Field::Q), None),
        ]
        .into_iter()
        .map(|(a, _): (AInftyAlgebra, Option<()>)| {
            let d = AInftyBimodule::diagonal(&a);
            (a, d)
        }) {
            let id = BimoduleHom::identity(&module);
            assert!(id.is_closed(&algebra, &module, &module));
            let h = id.h_level(&algebra, &module, &module).unwrap();
            assert!(h.is_identity(), "H(id) ≠ id: {h:?}");

            for (key, q, g) in hom_basis_pairs(&algebra, &module, &module, 2) {
                let phi = single(algebra.field(), g, &key, q);
                assert_eq!(BimoduleHom::compose(&algebra, &id, &phi), phi);
                assert_eq!(BimoduleHom::compose(&algebra, &phi, &id), phi);
            }
        }
    }

    #[test]
    fn leibniz_rule_for_the_differential() {
        for algebra in [
            fixtures::exterior(Field::Q),
            fixtures::cyclic_quiver(2, Field::Q, &fixtures::quiver_default_degrees(2)),
        ] {
            let m = AInftyBimodule::diagonal(&algebra);
            let pairs = hom_basis_pairs(&algebra, &m, &m, 1);
            for (kf, qf, gf) in &pairs {
                let phi = single(algebra.field(), *gf, kf, *qf);
                let dphi = phi.delta(&algebra, &m, &m);
                for (kg, qg, gg) in &pairs {
                    let psi = single(algebra.field(), *gg, kg, *qg);
                    let dpsi = psi.delta(&algebra, &m, &m);
                    let lhs = BimoduleHom::compose(&algebra, &psi, &phi).delta(&algebra, &m, &m);
                    let rhs = BimoduleHom::compose(&algebra, &dpsi, &phi)
                        .add(
                            &BimoduleHom::compose(&algebra, &psi, &dphi)
                                .scale(&algebra.field().sign(*gg)),
                        )
                        .unwrap();
                    assert_eq!(lhs, rhs, "Leibniz failed for ψ={kg:?}→{qg}, φ={kf:?}→{qf}");
                }
            }
        }
    }

    #[test]
    fn hom_complex_squares_and_reports_stabilization() {
        let algebra = fixtures::exterior(Field::Q);
        let diag = AInftyBimodule::diagonal(&algebra);
        let cx = HomComplex::new(&algebra, &diag, &diag, 3).unwrap();

        // d² = 0 at the matrix level (also verified inside cohomology_at).
        for (&g, m) in &cx.diffs {
            if let Some(next) = cx.diffs.get(&(g + 1)) {
                if next.cols() == m.rows() {
                    assert!(next.mul(m).unwrap().is_zero());
                }
            }
        }

        // The identity morphism represents a nonzero class in degree 0.
        let id = BimoduleHom::identity(&diag);
        let class = cx.class_of(&id).unwrap();
        assert!(!class.iter().all(Scalar::is_zero));

        // The flag means exactly "dims agree with the cap−1 truncation".
        let prev = HomComplex::new(&algebra, &diag, &diag, 2).unwrap();
        assert_eq!(cx.stabilized, cx.dims == prev.dims);

        // Representatives are cocycles of the truncated complex.
        for (&g, &n) in &cx.dims {
            for k in 0..n {
                let rep = cx.representative_hom(g, k).unwrap();
                let back = cx.class_of(&rep).unwrap();
                let expected: Vec<Scalar> = (0..n)
                    .map(|i| {
                        if i == k {
                            cx.field.one()
                        } else {
                            cx.field.from_int(0)
                        }
                    })
                    .collect();
                assert_eq!(back, expected);
            }
        }
    }

    #[test]
    fn shifting_the_target_shifts_the_complex() {
        let algebra = fixtures::cyclic_quiver(2, Field::Q, &fixtures::quiver_default_degrees(2));
        let diag = AInftyBimodule::diagonal(&algebra);
        let shifted = diag.shift_by(&algebra, 1);
        let plain = HomComplex::new(&algebra, &diag, &diag, 2).unwrap();
        let into_shift = HomComplex::new(&algebra, &diag, &shifted, 2).unwrap();
        let expected: BTreeMap<i64, usize> = plain.dims.iter().map(|(&g, &n)| (g - 1, n)).collect();
        assert_eq!(into_shift.dims, expected);
    }

    #[test]
    fn sign_twists_are_isomorphisms_via_an_explicit_pair() {
        // The graded sign map `p ↦ (−1)^{|p|} p`, taken in both directions,
        // exhibits a bimodule and its sign twist as inverse on cohomology.
        let cases = vec![
            {
                let a = fixtures::exterior(Field::Q);
                let d = AInftyBimodule::diagonal(&a);
                (a, d)
            },
            {
                let a = fixtures::cyclic_quiver(2, Field::Q, &fixtures::quiver_default_degrees(2));
                let d = AInftyBimodule::diagonal(&a);
                (a, d)
            },
        ];
        for (a, p) in cases {
            let tw = p.sign_twist(&a);
            let graded_sign = |module: &AInftyBimodule| -> Vec<HomEntry> {
                (0..module.space().dim())
                    .map(|i| HomEntry {
                        right: vec![],
                        p: i,
                        left: vec![],
                        output: i,
                        coeff: Field::Q.sign(module.space().degree(i)),
                    })
                    .collect()
            };
            let f = BimoduleHom::new(&a, &p, &tw, 0, graded_sign(&p)).unwrap();
            let g = BimoduleHom::new(&a, &tw, &p, 0, graded_sign(&tw)).unwrap();
            assert!(verify_inverse_pair(&a, &p, &tw, &f, &g).unwrap());
        }
    }

    #[test]
    fn inverse_pair_rejects_non_inverses_and_non_chain_maps() {
        let a = fixtures::exterior(Field::Q);
        let d = AInftyBimodule::diagonal(&a);
        let tw = d.sign_twist(&a);

        // Zero maps are closed but compose to zero, not the identity.
        let zero = BimoduleHom::zero(Field::Q, 0);
        assert!(!verify_inverse_pair(&a, &d, &tw, &zero, &zero).unwrap());

        // Negating one side of a genuine pair composes to minus the identity.
        let graded_sign = |module: &AInftyBimodule| -> Vec<HomEntry> {
            (0..module.space().dim())
                .map(|i| HomEntry {
                    right: vec![],
                    p: i,
                    left: vec![],
                    output: i,
                    coeff: Field::Q.sign(module.space().degree(i)),
                })
                .collect()
        };
        let f = BimoduleHom::new(&a, &d, &tw, 0, graded_sign(&d)).unwrap();
        let g = BimoduleHom::new(&a, &tw, &d, 0, graded_sign(&tw)).unwrap();
        let minus_one = Field::Q.from_int(-1);
        assert!(!verify_inverse_pair(&a, &d, &tw, &f, &g.scale(&minus_one)).unwrap());

        // The identity-shaped map between differently scaled modules is not
        // even a chain map: the right actions disagree by the scaling.
        let p2 = fixtures::scaled_module(&a, Field::Q.from_int(2));
        let p3 = fixtures::scaled_module(&a, Field::Q.from_int(3));
        let id_shape = |module: &AInftyBimodule| -> Vec<HomEntry> {
            (0..module.space().dim())
                .map(|i| HomEntry {
                    right: vec![],
                    p: i,
                    left: vec![],
                    output: i,
                    coeff: Field::Q.one(),
                })
                .collect()
        };
        let fwd = BimoduleHom::new(&a, &p2, &p3, 0, id_shape(&p2)).unwrap();
        let bwd = BimoduleHom::new(&a, &p3, &p2, 0, id_shape(&p3)).unwrap();
        assert!(!fwd.is_closed(&a, &p2, &p3));
        assert!(!verify_inverse_pair(&a, &p2, &p3, &fwd, &bwd).unwrap());
    }

    #[test]
    fn scaled_module_section_is_a_closed_degree_one_morphism() {
        let algebra = fixtures::exterior(Field::Q);
        let diag = AInftyBimodule::diagonal(&algebra);
        let p = fixtures::scaled_module(&algebra, Field::Q.from_int(5));
        let x = algebra.space().index_of("x").unwrap();
        let one = p.space().index_of("p1").unwrap();
        let t = BimoduleHom::new(
            &algebra,
            &p,
            &diag,
            1,
            vec![HomEntry {
                right: vec![],
                p: one,
                left: vec![],
                output: x,
                coeff: Field::Q.one(),
            }],
        )
        .unwrap();
        assert!(t.is_closed(&algebra, &p, &diag));

        // On cohomology: [p1] ↦ [x] ≠ 0.
        let h = t.h_level(&algebra, &p, &diag).unwrap();
        let block = h.block(0).unwrap();
        assert_eq!((block.rows(), block.cols()), (1, 1));
        assert!(!block.get(0, 0).is_zero());

        // And it is not a boundary in the truncated complex.
        let cx = HomComplex::new(&algebra, &p, &diag, 2).unwrap();
        assert!(!cx.class_is_zero(&t).unwrap());
    }
}

//! Exact sparse linear algebra: matrices, echelon forms, kernels, images,
//! and cohomology of three-term complexes.
//!
//! Over `Q` the elimination is fraction-free (cross-multiplication with
//! per-row content removal, Bareiss-style) to control coefficient blow-up;
//! over `F_p` it is plain Gauss–Jordan. Pivoting is deterministic — for each
//! column, in increasing order, the smallest-index unused row with a nonzero
//! entry — so every basis this module returns is reproducible across runs.
//! Above a configurable density threshold the elimination switches to a
//! dense row representation with the identical pivot rule and arithmetic.

use crate::scalar::{Field, Scalar};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Errors from matrix construction and linear-algebra queries.
#[derive(Clone, PartialEq, Debug)]
pub enum LinAlgError {
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
        op: &'static str,
    },
    FieldMismatch,
    /// `d_out ∘ d_in ≠ 0`: the pair is not a complex. Carries the index of a
    /// basis vector whose double image is nonzero, and that image.
    NotAComplex {
        witness_column: usize,
        image: Vec<Scalar>,
    },
    /// A vector handed to a cohomology projection is not a cocycle.
    NotACocycle,
}

impl fmt::Display for LinAlgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinAlgError::IndexOutOfRange {
                row,
                col,
                rows,
                cols,
            } => {
                write!(
                    f,
                    "index ({row}, {col}) out of range for a {rows}x{cols} matrix"
                )
            }
            LinAlgError::DimensionMismatch { left, right, op } => write!(
                f,
                "dimension mismatch in {op}: {}x{} against {}x{}",
                left.0, left.1, right.0, right.1
            ),
            LinAlgError::FieldMismatch => write!(f, "operands belong to different fields"),
            LinAlgError::NotAComplex { witness_column, .. } => write!(
                f,
                "d_out ∘ d_in ≠ 0: basis vector {witness_column} has nonzero double image"
            ),
            LinAlgError::NotACocycle => write!(f, "vector is not in the kernel of d_out"),
        }
    }
}

impl std::error::Error for LinAlgError {}

/// A sparse row: column index → nonzero scalar.
pub type SparseVec = BTreeMap<usize, Scalar>;

/// An immutable-after-construction sparse matrix over a fixed field.
///
/// At most one entry per `(row, col)`; zeros are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    field: Field,
    entries: BTreeMap<(usize, usize), Scalar>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize, field: Field) -> Self {
        SparseMatrix {
            rows,
            cols,
            field,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize, field: Field) -> Self {
        let mut m = SparseMatrix::new(n, n, field);
        for i in 0..n {
            m.entries.insert((i, i), field.one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    fn check_index(&self, row: usize, col: usize) -> Result<(), LinAlgError> {
        if row >= self.rows || col >= self.cols {
            return Err(LinAlgError::IndexOutOfRange {
                row,
                col,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    /// Replace the entry at `(row, col)`; a zero scalar clears it.
    pub fn set(&mut self, row: usize, col: usize, value: Scalar) -> Result<(), LinAlgError> {
        self.check_index(row, col)?;
        if value.field() != self.field {
            return Err(LinAlgError::FieldMismatch);
        }
        if value.is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), value);
        }
        Ok(())
    }

    /// Accumulate into the entry at `(row, col)`.
    pub fn add_to(&mut self, row: usize, col: usize, value: Scalar) -> Result<(), LinAlgError> {
        self.check_index(row, col)?;
        if value.field() != self.field {
            return Err(LinAlgError::FieldMismatch);
        }
        let sum = &self.get(row, col) + &value;
        self.set(row, col, sum)
    }

    /// The entry at `(row, col)`, zero if absent.
    pub fn get(&self, row: usize, col: usize) -> Scalar {
        self.entries
            .get(&(row, col))
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    /// Iterate nonzero entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.entries.iter().map(|(&(r, c), s)| (r, c, s))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn density(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            0.0
        } else {
            self.entries.len() as f64 / (self.rows as f64 * self.cols as f64)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = SparseMatrix::new(self.cols, self.rows, self.field);
        for (&(r, c), s) in &self.entries {
            t.entries.insert((c, r), s.clone());
        }
        t
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn multiply(&self, other: &SparseMatrix) -> Result<SparseMatrix, LinAlgError> {
        if self.cols != other.rows {
            return Err(LinAlgError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
                op: "multiply",
            });
        }
        let mut out = SparseMatrix::new(self.rows, other.cols, self.field);
        let st = self.transpose();
        for (&(k, c), s) in &other.entries {
            for (&(k2, r), t) in st.entries.range((k, 0)..(k + 1, 0)) {
                debug_assert_eq!(k, k2);
                out.add_to(r, c, t * s)?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Scalar) -> SparseMatrix {
        let mut out = SparseMatrix::new(self.rows, self.cols, self.field);
        if s.is_zero() {
            return out;
        }
        for (&(r, c), v) in &self.entries {
            let w = v * s;
            if !w.is_zero() {
                out.entries.insert((r, c), w);
            }
        }
        out
    }

    pub fn neg(&self) -> SparseMatrix {
        self.scale(&self.field.from_int(-1))
    }

    pub fn add(&self, rhs: &SparseMatrix) -> Result<SparseMatrix, LinAlgError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(LinAlgError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (rhs.rows, rhs.cols),
                op: "add",
            });
        }
        if self.field != rhs.field {
            return Err(LinAlgError::FieldMismatch);
        }
        let mut out = self.clone();
        for (&(r, c), s) in &rhs.entries {
            out.add_to(r, c, s.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &SparseMatrix) -> Result<SparseMatrix, LinAlgError> {
        self.add(&rhs.neg())
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &SparseMatrix) -> Result<SparseMatrix, LinAlgError> {
        if self.cols != rhs.rows {
            return Err(LinAlgError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (rhs.rows, rhs.cols),
                op: "mul",
            });
        }
        if self.field != rhs.field {
            return Err(LinAlgError::FieldMismatch);
        }
        // Row-major accumulation: group rhs by row first.
        let mut rhs_rows: Vec<Vec<(usize, &Scalar)>> = vec![Vec::new(); rhs.rows];
        for (&(r, c), s) in &rhs.entries {
            rhs_rows[r].push((c, s));
        }
        let mut out = SparseMatrix::new(self.rows, rhs.cols, self.field);
        for (&(r, k), a) in &self.entries {
            for &(c, b) in &rhs_rows[k] {
                out.add_to(r, c, a * b)?;
            }
        }
        Ok(out)
    }

    /// Apply to a dense column vector.
    pub fn apply(&self, v: &[Scalar]) -> Result<Vec<Scalar>, LinAlgError> {
        if v.len() != self.cols {
            return Err(LinAlgError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (v.len(), 1),
                op: "apply",
            });
        }
        let mut out = vec![self.field.zero(); self.rows];
        for (&(r, c), s) in &self.entries {
            if !v[c].is_zero() {
                out[r] = &out[r] + &(s * &v[c]);
            }
        }
        Ok(out)
    }

    /// The `j`-th column as a dense vector.
    pub fn column(&self, j: usize) -> Vec<Scalar> {
        let mut out = vec![self.field.zero(); self.rows];
        for (&(r, c), s) in &self.entries {
            if c == j {
                out[r] = s.clone();
            }
        }
        out
    }

    /// Build from dense columns.
    pub fn from_columns(rows: usize, columns: &[Vec<Scalar>], field: Field) -> SparseMatrix {
        let mut m = SparseMatrix::new(rows, columns.len(), field);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column {j} has wrong length");
            for (i, s) in col.iter().enumerate() {
                if !s.is_zero() {
                    m.entries.insert((i, j), s.clone());
                }
            }
        }
        m
    }

    /// Extract all rows as sparse vectors (including empty ones).
    fn to_sparse_rows(&self) -> Vec<SparseVec> {
        let mut rows = vec![SparseVec::new(); self.rows];
        for (&(r, c), s) in &self.entries {
            rows[r].insert(c, s.clone());
        }
        rows
    }
}

/// Dense helpers on `Vec<Scalar>` used throughout the engine.
pub mod vec_ops {
    use super::*;

    pub fn zero(n: usize, field: Field) -> Vec<Scalar> {
        vec![field.zero(); n]
    }

    pub fn is_zero(v: &[Scalar]) -> bool {
        v.iter().all(|s| s.is_zero())
    }

    /// `target += s · source`.
    pub fn add_scaled(target: &mut [Scalar], source: &[Scalar], s: &Scalar) {
        assert_eq!(target.len(), source.len());
        if s.is_zero() {
            return;
        }
        for (t, x) in target.iter_mut().zip(source) {
            if !x.is_zero() {
                *t = &*t + &(x * s);
            }
        }
    }

    pub fn scale(v: &[Scalar], s: &Scalar) -> Vec<Scalar> {
        v.iter().map(|x| x * s).collect()
    }

    pub fn sub(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    pub fn dot(a: &[Scalar], b: &[Scalar], field: Field) -> Scalar {
        assert_eq!(a.len(), b.len());
        let mut acc = field.zero();
        for (x, y) in a.iter().zip(b) {
            if !x.is_zero() && !y.is_zero() {
                acc = &acc + &(x * y);
            }
        }
        acc
    }
}

/// Options for the elimination engine.
#[derive(Clone, Copy, Debug)]
pub struct ElimOptions {
    /// Switch to the dense row representation above this density.
    pub dense_threshold: f64,
}

impl Default for ElimOptions {
    fn default() -> Self {
        ElimOptions {
            dense_threshold: 0.30,
        }
    }
}

/// A reduced row-echelon form with optional left transform.
///
/// `rref_rows[i]` is the (normalized, pivot = 1) row whose pivot column is
/// `pivots[i]`; rows beyond `rank` of the original matrix reduced to zero.
/// When tracked, `transform` is a `rows × rows` matrix `T` with
/// `T · M = RREF` (zero rows included), which `solve` uses both to read off
/// solutions and to detect inconsistency.
#[derive(Clone, Debug)]
pub struct Echelon {
    rows: usize,
    cols: usize,
    field: Field,
    pivots: Vec<usize>,
    rref_rows: Vec<SparseVec>,
    /// Transform rows for the zero rows of the RREF (consistency checks).
    null_transform: Vec<SparseVec>,
    /// Transform rows aligned with `rref_rows`.
    pivot_transform: Vec<SparseVec>,
    has_transform: bool,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Pivot column indices in increasing order.
    pub fn pivot_columns(&self) -> &[usize] {
        &self.pivots
    }

    /// A basis of `ker M`, one vector per free column, in column order.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let pivot_set: BTreeMap<usize, usize> = self
            .pivots
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i))
            .collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains_key(&free) {
                continue;
            }
            let mut v = vec_ops::zero(self.cols, self.field);
            v[free] = self.field.one();
            for (i, &pc) in self.pivots.iter().enumerate() {
                if let Some(s) = self.rref_rows[i].get(&free) {
                    v[pc] = -s;
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `M x = v`; `None` if inconsistent. Free variables are set to
    /// zero, so the solution is the deterministic canonical one.
    pub fn solve(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        assert!(
            self.has_transform,
            "echelon was computed without a transform"
        );
        assert_eq!(v.len(), self.rows, "solve: wrong vector length");
        // Consistency: T v must vanish on the zero rows of the RREF.
        for t in &self.null_transform {
            let mut acc = self.field.zero();
            for (&j, s) in t {
                if !v[j].is_zero() {
                    acc = &acc + &(s * &v[j]);
                }
            }
            if !acc.is_zero() {
                return None;
            }
        }
        let mut x = vec_ops::zero(self.cols, self.field);
        for (i, &pc) in self.pivots.iter().enumerate() {
            let mut acc = self.field.zero();
            for (&j, s) in &self.pivot_transform[i] {
                if !v[j].is_zero() {
                    acc = &acc + &(s * &v[j]);
                }
            }
            x[pc] = acc;
        }
        Some(x)
    }

    /// The normalized RREF rows (pivot entries 1), aligned with `pivot_columns`.
    pub fn rref_rows(&self) -> &[SparseVec] {
        &self.rref_rows
    }
}

// --- elimination engine -----------------------------------------------------

/// Row storage abstraction so the sparse and dense paths share one algorithm.
trait RowStore {
    fn get(&self, row: usize, col: usize) -> Option<&Scalar>;
    /// row_i ← a·row_i + b·row_k (a ≠ 0), dropping zeros.
    fn axpy(&mut self, i: usize, k: usize, a: &Scalar, b: &Scalar);
    /// Divide row by a nonzero scalar.
    fn div_row(&mut self, i: usize, d: &Scalar);
    /// Content (gcd) of an integer row over Q; `None` if the row is zero.
    fn row_content(&self, i: usize) -> Option<BigInt>;
    fn row_is_zero(&self, i: usize) -> bool;
    fn to_sparse(&self, i: usize) -> SparseVec;
}

struct SparseRows(Vec<SparseVec>);

impl RowStore for SparseRows {
    fn get(&self, row: usize, col: usize) -> Option<&Scalar> {
        self.0[row].get(&col)
    }

    fn axpy(&mut self, i: usize, k: usize, a: &Scalar, b: &Scalar) {
        let src: Vec<(usize, Scalar)> = self.0[k].iter().map(|(&c, s)| (c, s.clone())).collect();
        let row = &mut self.0[i];
        if !a.is_one() {
            for s in row.values_mut() {
                *s = &*s * a;
            }
        }
        if !b.is_zero() {
            for (c, s) in src {
                let add = &s * b;
                match row.get_mut(&c) {
                    Some(cur) => {
                        let sum = &*cur + &add;
                        if sum.is_zero() {
                            row.remove(&c);
                        } else {
                            *cur = sum;
                        }
                    }
                    None => {
                        if !add.is_zero() {
                            row.insert(c, add);
                        }
                    }
                }
            }
        }
    }

    fn div_row(&mut self, i: usize, d: &Scalar) {
        let inv = d.inv().expect("division by zero in elimination");
        for s in self.0[i].values_mut() {
            *s = &*s * &inv;
        }
    }

    fn row_content(&self, i: usize) -> Option<BigInt> {
        row_content_iter(self.0[i].values())
    }

    fn row_is_zero(&self, i: usize) -> bool {
        self.0[i].is_empty()
    }

    fn to_sparse(&self, i: usize) -> SparseVec {
        self.0[i].clone()
    }
}

struct DenseRows {
    rows: Vec<Vec<Scalar>>,
}

impl RowStore for DenseRows {
    fn get(&self, row: usize, col: usize) -> Option<&Scalar> {
        let s = &self.rows[row][col];
        if s.is_zero() {
            None
        } else {
            Some(s)
        }
    }

    fn axpy(&mut self, i: usize, k: usize, a: &Scalar, b: &Scalar) {
        if i == k {
            // Self-scaling: row_i ← (a + b)·row_i.
            let f = a + b;
            for x in self.rows[i].iter_mut() {
                if !x.is_zero() {
                    *x = &*x * &f;
                }
            }
            return;
        }
        let (ri, rk) = if i < k {
            let (lo, hi) = self.rows.split_at_mut(k);
            (&mut lo[i], &hi[0])
        } else {
            let (lo, hi) = self.rows.split_at_mut(i);
            (&mut hi[0], &lo[k])
        };
        for (x, y) in ri.iter_mut().zip(rk.iter()) {
            let mut v = if a.is_one() { x.clone() } else { &*x * a };
            if !b.is_zero() && !y.is_zero() {
                v = &v + &(y * b);
            }
            *x = v;
        }
    }

    fn div_row(&mut self, i: usize, d: &Scalar) {
        let inv = d.inv().expect("division by zero in elimination");
        for s in self.rows[i].iter_mut() {
            if !s.is_zero() {
                *s = &*s * &inv;
            }
        }
    }

    fn row_content(&self, i: usize) -> Option<BigInt> {
        row_content_iter(self.rows[i].iter().filter(|s| !s.is_zero()))
    }

    fn row_is_zero(&self, i: usize) -> bool {
        self.rows[i].iter().all(|s| s.is_zero())
    }

    fn to_sparse(&self, i: usize) -> SparseVec {
        self.rows[i]
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_zero())
            .map(|(c, s)| (c, s.clone()))
            .collect()
    }
}

fn row_content_iter<'a>(values: impl Iterator<Item = &'a Scalar>) -> Option<BigInt> {
    let mut g = BigInt::zero();
    for s in values {
        match s {
            Scalar::Q(q) => {
                debug_assert!(q.denom().is_one(), "content of a non-integer row");
                g = g.gcd(q.numer());
            }
            Scalar::Fp { .. } => return None,
        }
    }
    if g.is_zero() {
        None
    } else {
        Some(g)
    }
}

/// Compute the reduced row-echelon form of `m` with deterministic pivoting.
///
/// Over `Q`, rows are first scaled to primitive integer vectors and the
/// forward phase uses fraction-free cross-multiplication with content
/// removal; back-substitution then normalizes pivots to 1. Over `F_p`, plain
/// Gauss–Jordan. Set `want_transform` to also track `T` with `T·M = RREF`
/// (needed by [`Echelon::solve`]).
pub fn rref(m: &SparseMatrix, want_transform: bool, opts: &ElimOptions) -> Echelon {
    let field = m.field();
    let dense = m.density() > opts.dense_threshold && m.rows() > 0 && m.cols() > 0;
    if dense {
        let mut rows = vec![vec_ops::zero(m.cols(), field); m.rows()];
        for (r, c, s) in m.iter() {
            rows[r][c] = s.clone();
        }
        let store = DenseRows { rows };
        run_elimination(store, m.rows(), m.cols(), field, want_transform)
    } else {
        let store = SparseRows(m.to_sparse_rows());
        run_elimination(store, m.rows(), m.cols(), field, want_transform)
    }
}

fn run_elimination<S: RowStore>(
    mut work: S,
    nrows: usize,
    ncols: usize,
    field: Field,
    want_transform: bool,
) -> Echelon {
    let one = field.one();
    let mut transform: Option<SparseRows> = if want_transform {
        Some(SparseRows(
            (0..nrows)
                .map(|i| SparseVec::from([(i, one.clone())]))
                .collect(),
        ))
    } else {
        None
    };

    // Over Q: scale every row to a primitive integer vector (does not change
    // the row space, kernel, or pivot structure).
    if field == Field::Q {
        for i in 0..nrows {
            let row = work.to_sparse(i);
            if row.is_empty() {
                continue;
            }
            let mut lcm = BigInt::one();
            for s in row.values() {
                if let Scalar::Q(q) = s {
                    lcm = lcm.lcm(q.denom());
                }
            }
            let scale = Scalar::Q(BigRational::from_integer(lcm));
            work.axpy(i, i, &scale, &field.zero());
            if let Some(t) = transform.as_mut() {
                t.axpy(i, i, &scale, &field.zero());
            }
            if let Some(g) = work.row_content(i) {
                if !g.is_one() {
                    let d = Scalar::Q(BigRational::from_integer(g));
                    work.div_row(i, &d);
                    if let Some(t) = transform.as_mut() {
                        t.div_row(i, &d);
                    }
                }
            }
        }
    }

    // Forward phase: echelon form.
    let mut used = vec![false; nrows];
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    for col in 0..ncols {
        let Some(prow) = (0..nrows).find(|&r| !used[r] && work.get(r, col).is_some()) else {
            continue;
        };
        used[prow] = true;
        pivots.push((prow, col));
        let piv = work.get(prow, col).unwrap().clone();
        for i in 0..nrows {
            if used[i] {
                continue;
            }
            let Some(c) = work.get(i, col).cloned() else {
                continue;
            };
            match field {
                Field::Q => {
                    // Fraction-free: row_i ← piv·row_i − c·row_p, then remove content.
                    work.axpy(i, prow, &piv, &(-&c));
                    if let Some(t) = transform.as_mut() {
                        t.axpy(i, prow, &piv, &(-&c));
                    }
                    if let Some(g) = work.row_content(i) {
                        if !g.is_one() {
                            let d = Scalar::Q(BigRational::from_integer(g));
                            work.div_row(i, &d);
                            if let Some(t) = transform.as_mut() {
                                t.div_row(i, &d);
                            }
                        }
                    }
                }
                Field::Fp(_) => {
                    // Plain: row_i ← row_i − (c/piv)·row_p.
                    let factor = -&c.div(&piv).expect("nonzero pivot");
                    work.axpy(i, prow, &one, &factor);
                    if let Some(t) = transform.as_mut() {
                        t.axpy(i, prow, &one, &factor);
                    }
                }
            }
        }
    }

    // Back-substitution: normalize pivots to 1, clear entries above pivots.
    for idx in (0..pivots.len()).rev() {
        let (prow, pcol) = pivots[idx];
        let piv = work.get(prow, pcol).unwrap().clone();
        if !piv.is_one() {
            work.div_row(prow, &piv);
            if let Some(t) = transform.as_mut() {
                t.div_row(prow, &piv);
            }
        }
        for &(r, _) in pivots.iter().take(idx) {
            if let Some(c) = work.get(r, pcol).cloned() {
                work.axpy(r, prow, &one, &(-&c));
                if let Some(t) = transform.as_mut() {
                    t.axpy(r, prow, &one, &(-&c));
                }
            }
        }
        // Also clear pivot columns from earlier pivot rows processed later:
        // handled above since we iterate idx from last to first and subtract
        // from all earlier pivot rows.
    }

    // Assemble output ordered by pivot column.
    let mut order: Vec<usize> = (0..pivots.len()).collect();
    order.sort_by_key(|&i| pivots[i].1);
    let mut rref_rows = Vec::with_capacity(pivots.len());
    let mut pivot_transform = Vec::with_capacity(pivots.len());
    let mut pivot_cols = Vec::with_capacity(pivots.len());
    for &i in &order {
        let (r, c) = pivots[i];
        pivot_cols.push(c);
        rref_rows.push(work.to_sparse(r));
        if let Some(t) = transform.as_ref() {
            pivot_transform.push(t.0[r].clone());
        }
    }
    let mut null_transform = Vec::new();
    if let Some(t) = transform.as_ref() {
        for r in 0..nrows {
            if !used[r] {
                debug_assert!(work.row_is_zero(r));
                null_transform.push(t.0[r].clone());
            }
        }
    }

    Echelon {
        rows: nrows,
        cols: ncols,
        field,
        pivots: pivot_cols,
        rref_rows,
        null_transform,
        pivot_transform,
        has_transform: want_transform,
    }
}

// --- public queries ----------------------------------------------------------

/// Rank, kernel basis, and image basis of a sparse matrix.
///
/// The kernel vectors satisfy `M v = 0` exactly; the image basis consists of
/// the original matrix columns at the pivot positions.
pub fn rank_kernel_image(m: &SparseMatrix) -> (usize, Vec<Vec<Scalar>>, Vec<Vec<Scalar>>) {
    let ech = rref(m, false, &ElimOptions::default());
    let kernel = ech.kernel_basis();
    let image: Vec<Vec<Scalar>> = ech.pivot_columns().iter().map(|&j| m.column(j)).collect();
    (ech.rank(), kernel, image)
}

/// Cohomology of a three-term complex `· --d_in--> K^n --d_out--> ·` at the
/// middle slot, with deterministic representatives and a projection map.
#[derive(Clone, Debug)]
pub struct Cohomology {
    /// dim ker(d_out) − rank(d_in).
    pub dim: usize,
    pub cocycle_dim: usize,
    pub boundary_dim: usize,
    /// Chosen representative cocycles (length-`n` vectors).
    pub representatives: Vec<Vec<Scalar>>,
    /// Echelon of `[boundaries | representatives]` with transform, used to
    /// express any cocycle in the chosen basis modulo boundaries.
    proj: Echelon,
    d_out: SparseMatrix,
    n: usize,
    field: Field,
}

/// Compute cohomology at the middle of `d_in` then `d_out`.
///
/// Verifies `d_out ∘ d_in = 0` (returning a witness otherwise), computes
/// `dim = dim ker(d_out) − rank(d_in)`, picks representative cocycles
/// extending the boundary space, and prepares the projection solver.
pub fn cohomology_at(d_in: &SparseMatrix, d_out: &SparseMatrix) -> Result<Cohomology, LinAlgError> {
    let n = d_out.cols();
    if d_in.rows() != n {
        return Err(LinAlgError::DimensionMismatch {
            left: (d_in.rows(), d_in.cols()),
            right: (d_out.rows(), d_out.cols()),
            op: "cohomology_at",
        });
    }
    if d_in.field() != d_out.field() {
        return Err(LinAlgError::FieldMismatch);
    }
    let field = d_in.field();

    // d_out ∘ d_in = 0, with witness on failure.
    let square = d_out.mul(d_in)?;
    if !square.is_zero() {
        let (_, col, _) = square
            .iter()
            .next()
            .map(|(r, c, s)| (r, c, s.clone()))
            .unwrap();
        return Err(LinAlgError::NotAComplex {
            witness_column: col,
            image: square.column(col),
        });
    }

    let out_ech = rref(d_out, false, &ElimOptions::default());
    let cocycles = out_ech.kernel_basis();
    let in_ech = rref(d_in, false, &ElimOptions::default());
    let boundaries: Vec<Vec<Scalar>> = in_ech
        .pivot_columns()
        .iter()
        .map(|&j| d_in.column(j))
        .collect();

    let cocycle_dim = cocycles.len();
    let boundary_dim = boundaries.len();

    // Extend the boundary basis to a basis of the cocycles: eliminate
    // [B | Z] and keep the Z-columns that become pivots.
    let mut cols: Vec<Vec<Scalar>> = boundaries.clone();
    cols.extend(cocycles.iter().cloned());
    let bz = SparseMatrix::from_columns(n, &cols, field);
    let bz_ech = rref(&bz, false, &ElimOptions::default());
    let representatives: Vec<Vec<Scalar>> = bz_ech
        .pivot_columns()
        .iter()
        .filter(|&&j| j >= boundary_dim)
        .map(|&j| cocycles[j - boundary_dim].clone())
        .collect();
    debug_assert_eq!(boundary_dim + representatives.len(), cocycle_dim);

    // Projection solver over [B | R].
    let mut proj_cols = boundaries;
    proj_cols.extend(representatives.iter().cloned());
    let proj_m = SparseMatrix::from_columns(n, &proj_cols, field);
    let proj = rref(&proj_m, true, &ElimOptions::default());

    Ok(Cohomology {
        dim: cocycle_dim - boundary_dim,
        cocycle_dim,
        boundary_dim,
        representatives,
        proj,
        d_out: d_out.clone(),
        n,
        field,
    })
}

impl Cohomology {
    /// Coordinates of the class of `v` in the representative basis.
    ///
    /// Errors with [`LinAlgError::NotACocycle`] if `v ∉ ker(d_out)`.
    pub fn project(&self, v: &[Scalar]) -> Result<Vec<Scalar>, LinAlgError> {
        if v.len() != self.n {
            return Err(LinAlgError::DimensionMismatch {
                left: (self.n, 1),
                right: (v.len(), 1),
                op: "project",
            });
        }
        if !vec_ops::is_zero(&self.d_out.apply(v)?) {
            return Err(LinAlgError::NotACocycle);
        }
        let x = self.proj.solve(v).ok_or(LinAlgError::NotACocycle)?;
        Ok(x[self.boundary_dim..].to_vec())
    }

    /// Whether the class of the cocycle `v` vanishes.
    pub fn class_is_zero(&self, v: &[Scalar]) -> Result<bool, LinAlgError> {
        Ok(vec_ops::is_zero(&self.project(v)?))
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Ambient dimension (the middle term of the complex).
    pub fn ambient_dim(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Scalar {
        Field::Q.from_int(n)
    }

    fn m_from(
        rows: usize,
        cols: usize,
        data: &[(usize, usize, i64)],
        field: Field,
    ) -> SparseMatrix {
        let mut m = SparseMatrix::new(rows, cols, field);
        for &(r, c, v) in data {
            m.set(r, c, field.from_int(v)).unwrap();
        }
        m
    }

    #[test]
    fn zero_matrix_rank_and_kernel() {
        let m = SparseMatrix::new(3, 3, Field::Q);
        let (rank, kernel, image) = rank_kernel_image(&m);
        assert_eq!(rank, 0);
        assert_eq!(kernel.len(), 3);
        assert!(image.is_empty());
    }

    #[test]
    fn multiply_matches_apply_composition() {
        let a = m_from(2, 3, &[(0, 0, 1), (0, 2, 2), (1, 1, -3)], Field::Q);
        let b = m_from(3, 2, &[(0, 0, 4), (1, 0, 5), (2, 1, 6)], Field::Q);
        let ab = a.multiply(&b).unwrap();
        assert_eq!(ab.rows(), 2);
        assert_eq!(ab.cols(), 2);
        for col in 0..2 {
            let mut e = vec![q(0), q(0)];
            e[col] = q(1);
            let via_product = ab.apply(&e).unwrap();
            let via_stages = a.apply(&b.apply(&e).unwrap()).unwrap();
            assert_eq!(via_product, via_stages);
        }
        assert!(a.multiply(&a).is_err());
    }

    #[test]
    fn identity_rank_and_kernel() {
        let m = SparseMatrix::identity(4, Field::Q);
        let (rank, kernel, image) = rank_kernel_image(&m);
        assert_eq!(rank, 4);
        assert!(kernel.is_empty());
        assert_eq!(image.len(), 4);
    }

    #[test]
    fn kernel_vectors_are_exact() {
        let m = m_from(
            3,
            4,
            &[
                (0, 0, 2),
                (0, 1, 4),
                (1, 2, 3),
                (1, 3, 6),
                (2, 0, 1),
                (2, 1, 2),
            ],
            Field::Q,
        );
        let (rank, kernel, _) = rank_kernel_image(&m);
        assert_eq!(rank + kernel.len(), 4);
        for v in &kernel {
            assert!(vec_ops::is_zero(&m.apply(v).unwrap()));
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        // x + 2y = b1; 3x + 6y = b2 has a solution iff b2 = 3 b1.
        let m = m_from(
            2,
            2,
            &[(0, 0, 1), (0, 1, 2), (1, 0, 3), (1, 1, 6)],
            Field::Q,
        );
        let ech = rref(&m, true, &ElimOptions::default());
        let sol = ech.solve(&[q(5), q(15)]).expect("consistent");
        let back = m.apply(&sol).unwrap();
        assert_eq!(back, vec![q(5), q(15)]);
        assert!(ech.solve(&[q(5), q(14)]).is_none());
    }

    #[test]
    fn cohomology_zero_differentials() {
        let d_in = SparseMatrix::new(5, 0, Field::Q);
        let d_out = SparseMatrix::new(0, 5, Field::Q);
        let h = cohomology_at(&d_in, &d_out).unwrap();
        assert_eq!(h.dim, 5);
    }

    #[test]
    fn cohomology_exact_complex() {
        let d_in = SparseMatrix::identity(4, Field::Q);
        let d_out = SparseMatrix::new(0, 4, Field::Q);
        let h = cohomology_at(&d_in, &d_out).unwrap();
        assert_eq!(h.dim, 0);
    }

    #[test]
    fn cohomology_koszul_pair() {
        // K --x--> K --0--> K with x = 0 map vs multiplication by 2:
        // d_in = [2] (injective), d_out = 0 ⇒ H = ker/im = K/K = 0.
        let d_in = m_from(1, 1, &[(0, 0, 2)], Field::Q);
        let d_out = SparseMatrix::new(1, 1, Field::Q);
        let h = cohomology_at(&d_in, &d_out).unwrap();
        assert_eq!(h.dim, 0);
        // Projection of the boundary [2] is the zero class.
        assert!(h.class_is_zero(&[q(2)]).unwrap());
    }

    #[test]
    fn cohomology_rejects_non_complex() {
        let d_in = SparseMatrix::identity(2, Field::Q);
        let d_out = SparseMatrix::identity(2, Field::Q);
        let err = cohomology_at(&d_in, &d_out).unwrap_err();
        match err {
            LinAlgError::NotAComplex {
                witness_column,
                image,
            } => {
                assert_eq!(witness_column, 0);
                assert!(!vec_ops::is_zero(&image));
            }
            other => panic!("expected NotAComplex, got {other}"),
        }
    }

    #[test]
    fn projection_kills_boundaries_and_separates_classes() {
        // d_in: K^1 → K^2, e ↦ (1, 1); d_out = 0 on K^2.
        let d_in = m_from(2, 1, &[(0, 0, 1), (1, 0, 1)], Field::Q);
        let d_out = SparseMatrix::new(0, 2, Field::Q);
        let h = cohomology_at(&d_in, &d_out).unwrap();
        assert_eq!(h.dim, 1);
        assert!(h.class_is_zero(&[q(3), q(3)]).unwrap());
        let coords = h.project(&[q(2), q(0)]).unwrap();
        assert_eq!(coords.len(), 1);
        assert!(!coords[0].is_zero());
    }

    #[test]
    fn fp_elimination_matches_small_cases() {
        let f7 = Field::fp(7).unwrap();
        // det = 3·4 − 1·1 = 11 ≡ 4 mod 7: invertible.
        let m = m_from(2, 2, &[(0, 0, 3), (0, 1, 1), (1, 0, 1), (1, 1, 4)], f7);
        let (rank, kernel, _) = rank_kernel_image(&m);
        assert_eq!(rank, 2);
        assert!(kernel.is_empty());
        // det = 3·2 − 1·6 = 0: singular over any field.
        let m2 = m_from(2, 2, &[(0, 0, 3), (0, 1, 1), (1, 0, 6), (1, 1, 2)], f7);
        let (rank2, kernel2, _) = rank_kernel_image(&m2);
        assert_eq!(rank2, 1);
        assert_eq!(kernel2.len(), 1);
        assert!(vec_ops::is_zero(&m2.apply(&kernel2[0]).unwrap()));
    }

    #[test]
    fn transpose_and_product() {
        let m = m_from(2, 3, &[(0, 0, 1), (0, 2, 2), (1, 1, -1)], Field::Q);
        let t = m.transpose();
        assert_eq!(t.get(2, 0), q(2));
        let p = m.mul(&t).unwrap();
        assert_eq!(p.get(0, 0), q(5));
        assert_eq!(p.get(1, 1), q(1));
        assert_eq!(p.get(0, 1), q(0));
    }
}

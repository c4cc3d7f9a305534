//! Dense matrices over a [`FieldSpec`] and the reductions the decomposition
//! algorithms rely on: rank, kernel bases, left-to-right column reduction,
//! basis completion, and the SVD step used over the reals.
//!
//! There is one rank oracle per field: exact fields use Gaussian
//! elimination with first-nonzero pivoting, the real field uses the SVD
//! exclusively. Keeping a single policy per field avoids rank disagreements
//! between the operations built on top.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::field::{FieldScalar, FieldSpec};
use crate::Result;

/// Dense row-major matrix. Empty shapes (zero rows or zero columns) are
/// legal and compose with the usual dimension rules; the decomposition
/// drives its recursion off such matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<FieldScalar>,
}

impl Matrix {
    /// Build a matrix from row-major entries, validating that every entry
    /// belongs to `field`.
    pub fn new(field: FieldSpec, rows: usize, cols: usize, entries: Vec<FieldScalar>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if !entries.iter().all(|e| field.contains(e)) {
            return Err(Error::MixedFields);
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            entries: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    /// Convenience constructor from integer rows.
    pub fn from_i64_rows(field: &FieldSpec, rows: usize, cols: usize, data: &[&[i64]]) -> Result<Self> {
        if data.len() != rows || data.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "expected {rows} rows of {cols} entries"
            )));
        }
        let entries = data
            .iter()
            .flat_map(|r| r.iter().map(|&x| field.from_i64(x)))
            .collect();
        Matrix::new(*field, rows, cols, entries)
    }

    /// Assemble a matrix whose columns are the given vectors.
    pub fn from_columns(field: FieldSpec, rows: usize, columns: &[Vec<FieldScalar>]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(
                "column length differs from row count".into(),
            ));
        }
        let mut m = Matrix::zeros(field, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                if !field.contains(v) {
                    return Err(Error::MixedFields);
                }
                m.set(i, j, v.clone());
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &FieldScalar {
        assert!(r < self.rows && c < self.cols);
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldScalar) {
        assert!(r < self.rows && c < self.cols);
        self.entries[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<FieldScalar> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn columns(&self, range: std::ops::Range<usize>) -> Vec<Vec<FieldScalar>> {
        range.map(|c| self.column(c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.field != rhs.field {
            return Err(Error::MixedFields);
        }
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zeros(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = f.zero();
                for k in 0..self.cols {
                    let prod = fmul(f, self.get(i, k), rhs.get(k, j));
                    acc = fadd(f, &acc, &prod);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Apply the matrix to a vector.
    pub fn apply(&self, v: &[FieldScalar]) -> Result<Vec<FieldScalar>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} applied to {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let f = &self.field;
        let mut out = vec![f.zero(); self.rows];
        for i in 0..self.rows {
            let mut acc = f.zero();
            for k in 0..self.cols {
                acc = fadd(f, &acc, &fmul(f, self.get(i, k), &v[k]));
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Concatenate columns of `self` and `rhs` side by side.
    pub fn hstack(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.field != rhs.field {
            return Err(Error::MixedFields);
        }
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch("row counts differ in hstack".into()));
        }
        let mut cols = self.columns(0..self.cols);
        cols.extend(rhs.columns(0..rhs.cols));
        Matrix::from_columns(self.field, self.rows, &cols)
    }

    /// Largest entry magnitude; used as the scale for tolerance tests.
    pub fn max_magnitude(&self) -> f64 {
        self.entries.iter().map(|e| e.magnitude()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        let scale = self.max_magnitude();
        self.entries
            .iter()
            .all(|e| self.field.is_zero_scaled(e, scale))
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).to_f64())
    }

    pub(crate) fn from_dmatrix(field: FieldSpec, m: &DMatrix<f64>) -> Matrix {
        let mut out = Matrix::zeros(field, m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                out.set(r, c, FieldScalar::Real(m[(r, c)]));
            }
        }
        out
    }
}

/// An ordered list of vectors in a common ambient space. Construction via
/// [`BasisSet::new`] checks linear independence in debug builds.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    pub field: FieldSpec,
    pub ambient_dim: usize,
    pub vectors: Vec<Vec<FieldScalar>>,
}

impl BasisSet {
    pub fn new(field: FieldSpec, ambient_dim: usize, vectors: Vec<Vec<FieldScalar>>) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != ambient_dim) {
            return Err(Error::DimensionMismatch(
                "basis vector length differs from ambient dimension".into(),
            ));
        }
        let set = BasisSet {
            field,
            ambient_dim,
            vectors,
        };
        debug_assert!(
            rank(&set.as_matrix()) == set.vectors.len(),
            "basis vectors must be linearly independent"
        );
        Ok(set)
    }

    pub fn empty(field: FieldSpec, ambient_dim: usize) -> Self {
        BasisSet {
            field,
            ambient_dim,
            vectors: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// The vectors as the columns of a matrix.
    pub fn as_matrix(&self) -> Matrix {
        Matrix::from_columns(self.field, self.ambient_dim, &self.vectors)
            .expect("basis vectors share the ambient dimension")
    }
}

// All matrix entries are validated against the field at construction, so
// the scalar ops below cannot hit MixedFields.
fn fadd(f: &FieldSpec, a: &FieldScalar, b: &FieldScalar) -> FieldScalar {
    f.add(a, b).expect("validated entries")
}

fn fsub(f: &FieldSpec, a: &FieldScalar, b: &FieldScalar) -> FieldScalar {
    f.sub(a, b).expect("validated entries")
}

fn fmul(f: &FieldSpec, a: &FieldScalar, b: &FieldScalar) -> FieldScalar {
    f.mul(a, b).expect("validated entries")
}

fn fdiv(f: &FieldSpec, a: &FieldScalar, b: &FieldScalar) -> FieldScalar {
    f.div(a, b).expect("nonzero divisor")
}

/// Reduced row echelon form in place; returns the pivot columns.
///
/// Pivoting picks the first row with a nonzero entry (exact fields) or the
/// entry of largest magnitude (real field, for stability).
fn rref(m: &mut Matrix) -> Vec<usize> {
    let f = *m.field();
    let scale = m.max_magnitude();
    let (rows, cols) = (m.rows(), m.cols());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let pivot_row = if f.is_real() {
            (row..rows)
                .filter(|&r| !f.is_zero_scaled(m.get(r, col), scale))
                .max_by(|&a, &b| {
                    m.get(a, col)
                        .magnitude()
                        .partial_cmp(&m.get(b, col).magnitude())
                        .unwrap()
                })
        } else {
            (row..rows).find(|&r| !f.is_zero(m.get(r, col)))
        };
        let Some(pr) = pivot_row else { continue };
        if pr != row {
            for c in 0..cols {
                let tmp = m.get(pr, c).clone();
                m.set(pr, c, m.get(row, c).clone());
                m.set(row, c, tmp);
            }
        }
        let inv = f.inv(m.get(row, col)).expect("pivot is nonzero");
        for c in col..cols {
            let v = fmul(&f, m.get(row, c), &inv);
            m.set(row, c, v);
        }
        for r in 0..rows {
            if r == row {
                continue;
            }
            let factor = m.get(r, col).clone();
            if f.is_zero_scaled(&factor, scale) {
                m.set(r, col, f.zero());
                continue;
            }
            for c in col..cols {
                let v = fsub(&f, m.get(r, c), &fmul(&f, &factor, m.get(row, c)));
                m.set(r, c, v);
            }
            m.set(r, col, f.zero());
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Rank of the column space. Exact fields eliminate; the real field counts
/// singular values above `tol * max(rows, cols) * sigma_max`.
pub fn rank(a: &Matrix) -> usize {
    if a.rows() == 0 || a.cols() == 0 {
        return 0;
    }
    if a.field().is_real() {
        let sv = singular_values(a).expect("SVD of a finite matrix");
        numerical_rank(&sv, a.field().tol(), a.rows(), a.cols())
    } else {
        let mut m = a.clone();
        rref(&mut m).len()
    }
}

fn numerical_rank(sv: &[f64], tol: f64, rows: usize, cols: usize) -> usize {
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return 0;
    }
    let threshold = tol * rows.max(cols) as f64 * sigma_max;
    sv.iter().filter(|&&s| s > threshold).count()
}

/// Singular values in descending order.
fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    let d = a.to_dmatrix();
    let svd = nalgebra::linalg::SVD::try_new(d, false, false, f64::EPSILON, 0)
        .ok_or(Error::ConvergenceFailure)?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(sv)
}

/// Basis of the kernel `{v : Av = 0}`, with `cols - rank` vectors in a
/// deterministic order (free columns ascending over exact fields; trailing
/// right-singular vectors over the reals).
pub fn kernel_basis(a: &Matrix) -> BasisSet {
    let f = *a.field();
    let n = a.cols();
    if n == 0 {
        return BasisSet::empty(f, 0);
    }
    if a.rows() == 0 {
        let vectors = (0..n)
            .map(|j| {
                let mut v = vec![f.zero(); n];
                v[j] = f.one();
                v
            })
            .collect();
        return BasisSet::new(f, n, vectors).expect("unit vectors");
    }
    if f.is_real() {
        let step = svd_step(a).expect("SVD of a finite matrix");
        let vectors = step.v.columns(step.nz..n);
        return BasisSet { field: f, ambient_dim: n, vectors };
    }
    let mut m = a.clone();
    let pivots = rref(&mut m);
    let pivot_set: Vec<usize> = pivots.clone();
    let mut vectors = Vec::new();
    for free in 0..n {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![f.zero(); n];
        v[free] = f.one();
        for (row, &p) in pivot_set.iter().enumerate() {
            // RREF row: x_p + sum over free columns of coeff * x_free = 0.
            v[p] = f.neg(m.get(row, free)).expect("validated entries");
        }
        vectors.push(v);
    }
    BasisSet::new(f, n, vectors).expect("kernel vectors are independent")
}

/// A basis of the column space: the pivot columns of `a` over exact fields,
/// an orthonormal basis (left singular vectors) over the reals.
pub fn image_basis(a: &Matrix) -> BasisSet {
    let f = *a.field();
    if a.rows() == 0 || a.cols() == 0 {
        return BasisSet::empty(f, a.rows());
    }
    if f.is_real() {
        let d = a.to_dmatrix();
        let svd = nalgebra::linalg::SVD::try_new(d.clone(), true, false, f64::EPSILON, 0)
            .expect("SVD of a finite matrix");
        let (sv, perm) = sorted_singular_values(&svd.singular_values);
        let r = numerical_rank(&sv, f.tol(), a.rows(), a.cols());
        let u = svd.u.expect("requested U");
        let vectors = (0..r)
            .map(|k| {
                let col = perm[k];
                (0..a.rows()).map(|i| FieldScalar::Real(u[(i, col)])).collect()
            })
            .collect();
        return BasisSet { field: f, ambient_dim: a.rows(), vectors };
    }
    let mut m = a.clone();
    let pivots = rref(&mut m);
    let vectors = pivots.iter().map(|&c| a.column(c)).collect();
    BasisSet::new(f, a.rows(), vectors).expect("pivot columns are independent")
}

fn sorted_singular_values(sv: &nalgebra::DVector<f64>) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap());
    let sorted = idx.iter().map(|&i| sv[i]).collect();
    (sorted, idx)
}

/// Incremental span membership used by `bca` and the decomposition. Exact
/// fields keep a Gauss-Jordan echelon of the absorbed vectors; the real
/// field keeps an orthonormal basis and tests the projection residual.
pub(crate) enum SpanTracker {
    Exact {
        field: FieldSpec,
        dim: usize,
        rows: Vec<(usize, Vec<FieldScalar>)>,
    },
    Real {
        tol: f64,
        dim: usize,
        basis: Vec<nalgebra::DVector<f64>>,
    },
}

impl SpanTracker {
    pub fn new(field: FieldSpec, dim: usize) -> Self {
        if field.is_real() {
            SpanTracker::Real {
                tol: field.tol(),
                dim,
                basis: Vec::new(),
            }
        } else {
            SpanTracker::Exact {
                field,
                dim,
                rows: Vec::new(),
            }
        }
    }

    /// Absorb `v`; returns true when the span grew (i.e. `v` was outside).
    pub fn absorb(&mut self, v: &[FieldScalar]) -> bool {
        match self {
            SpanTracker::Exact { field, dim, rows } => {
                assert_eq!(v.len(), *dim);
                let f = *field;
                let mut w: Vec<FieldScalar> = v.to_vec();
                for (p, u) in rows.iter() {
                    let coeff = w[*p].clone();
                    if f.is_zero(&coeff) {
                        continue;
                    }
                    for i in 0..*dim {
                        w[i] = fsub(&f, &w[i], &fmul(&f, &coeff, &u[i]));
                    }
                }
                let Some(p) = (0..*dim).find(|&i| !f.is_zero(&w[i])) else {
                    return false;
                };
                let inv = f.inv(&w[p]).expect("pivot nonzero");
                for x in w.iter_mut() {
                    *x = fmul(&f, x, &inv);
                }
                // Keep stored vectors zero at each other's pivots.
                for (_, u) in rows.iter_mut() {
                    let coeff = u[p].clone();
                    if f.is_zero(&coeff) {
                        continue;
                    }
                    for i in 0..*dim {
                        u[i] = fsub(&f, &u[i], &fmul(&f, &coeff, &w[i]));
                    }
                }
                rows.push((p, w));
                true
            }
            SpanTracker::Real { tol, dim, basis } => {
                assert_eq!(v.len(), *dim);
                let mut r = nalgebra::DVector::from_fn(*dim, |i, _| v[i].to_f64());
                let norm = r.norm();
                // Two Gram-Schmidt passes keep the residual orthogonal.
                for _ in 0..2 {
                    for q in basis.iter() {
                        let c = q.dot(&r);
                        r.axpy(-c, q, 1.0);
                    }
                }
                if r.norm() > *tol * norm {
                    let n = r.norm();
                    basis.push(r / n);
                    true
                } else {
                    false
                }
            }
        }
    }
}

/// Basis completion: the minimal sublist of `w` (in `w`'s order) that
/// extends `u` to span `span(u) + span(w)`. Returns the original vectors
/// of `w`, not reduced residues.
pub fn bca(u: &BasisSet, w: &BasisSet) -> Result<BasisSet> {
    if u.field != w.field {
        return Err(Error::MixedFields);
    }
    if u.ambient_dim != w.ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions differ: {} vs {}",
            u.ambient_dim, w.ambient_dim
        )));
    }
    let mut tracker = SpanTracker::new(u.field, u.ambient_dim);
    for v in &u.vectors {
        let grew = tracker.absorb(v);
        debug_assert!(grew, "bca expects linearly independent u");
    }
    let mut kept = Vec::new();
    for v in &w.vectors {
        if tracker.absorb(v) {
            kept.push(v.clone());
        }
    }
    Ok(BasisSet {
        field: u.field,
        ambient_dim: u.ambient_dim,
        vectors: kept,
    })
}

/// Left-to-right column reduction `R = A * V`.
///
/// `V` is invertible, upper triangular with unit diagonal, and `R` has a
/// distinct lowest-nonzero row index per nonzero column. Columns are
/// reduced against the unique earlier column owning the same low.
pub fn reduce_left_to_right(a: &Matrix) -> (Matrix, Matrix) {
    let f = *a.field();
    let mut r = a.clone();
    let mut v = Matrix::identity(f, a.cols());
    // low -> owning column among already-settled columns
    let mut owner: Vec<Option<usize>> = vec![None; a.rows()];
    for j in 0..a.cols() {
        loop {
            let Some(low) = column_low(&r, j) else { break };
            let Some(jp) = owner[low] else {
                owner[low] = Some(j);
                break;
            };
            let gamma = fdiv(&f, r.get(low, j), r.get(low, jp));
            for i in 0..a.rows() {
                let val = fsub(&f, r.get(i, j), &fmul(&f, &gamma, r.get(i, jp)));
                r.set(i, j, val);
            }
            // The eliminated entry is zero by construction; store it as such
            // so tolerance noise cannot resurrect the low.
            r.set(low, j, f.zero());
            for i in 0..v.rows() {
                let val = fsub(&f, v.get(i, j), &fmul(&f, &gamma, v.get(i, jp)));
                v.set(i, j, val);
            }
        }
    }
    (r, v)
}

/// Row index of the lowest nonzero entry of column `j`, or `None` for a
/// (tolerance-)zero column. The zero test scales with the column.
pub fn column_low(m: &Matrix, j: usize) -> Option<usize> {
    let f = m.field();
    let scale = (0..m.rows())
        .map(|i| m.get(i, j).magnitude())
        .fold(0.0, f64::max);
    (0..m.rows())
        .rev()
        .find(|&i| !f.is_zero_scaled(m.get(i, j), scale))
}

/// Output of [`svd_step`].
pub struct SvdStep {
    /// Restriction of the input to the orthogonal complement of its kernel:
    /// `R = U * S[:, :nz] = A * V[:, :nz]`.
    pub r: Matrix,
    /// Full square matrix of right singular vectors (columns).
    pub v: Matrix,
    /// Numerical rank.
    pub nz: usize,
    /// Kernel dimension `cols - nz`; columns `nz..cols` of `v` span the kernel.
    pub dk: usize,
}

/// One SVD decomposition step over the reals: `A = U S V^T`, numerical rank
/// `nz`, and the restriction of `A` to the complement of its kernel.
pub fn svd_step(a: &Matrix) -> Result<SvdStep> {
    if !a.field().is_real() {
        return Err(Error::RealFieldRequired);
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let f = *a.field();
    let d = a.to_dmatrix();
    // Pad with zero rows when rows < cols so the right singular basis is
    // the full cols x cols square matrix.
    let padded = if a.rows() < a.cols() {
        let mut p = DMatrix::zeros(a.cols(), a.cols());
        p.view_mut((0, 0), (a.rows(), a.cols())).copy_from(&d);
        p
    } else {
        d.clone()
    };
    let svd = nalgebra::linalg::SVD::try_new(padded, false, true, f64::EPSILON, 0)
        .ok_or(Error::ConvergenceFailure)?;
    let (sv, perm) = sorted_singular_values(&svd.singular_values);
    let nz = numerical_rank(&sv, f.tol(), a.rows(), a.cols());
    let v_t = svd.v_t.expect("requested V^T");
    let mut v = DMatrix::zeros(a.cols(), a.cols());
    for (new_col, &old) in perm.iter().enumerate() {
        for i in 0..a.cols() {
            v[(i, new_col)] = v_t[(old, i)];
        }
    }
    let r = &d * v.columns(0, nz);
    Ok(SvdStep {
        r: Matrix::from_dmatrix(f, &r.into_owned()),
        v: Matrix::from_dmatrix(f, &v),
        nz,
        dk: a.cols() - nz,
    })
}

/// Solve `A X = B` column by column with one elimination of `A` shared by
/// all right-hand sides. Returns `None` if any column is inconsistent.
/// Free variables (if `A` is column-rank-deficient) are set to zero.
pub fn solve_columns(a: &Matrix, b: &Matrix) -> Result<Option<Matrix>> {
    if a.field() != b.field() {
        return Err(Error::MixedFields);
    }
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "solve with {} equation rows against rhs of {} rows",
            a.rows(),
            b.rows()
        )));
    }
    let f = *a.field();
    let mut aug = a.hstack(b)?;
    let pivots = rref(&mut aug);
    let scale = aug.max_magnitude();
    // Consistency: a pivot inside the RHS block means some column has no solution.
    if pivots.iter().any(|&p| p >= a.cols()) {
        return Ok(None);
    }
    let mut x = Matrix::zeros(f, a.cols(), b.cols());
    for (row, &p) in pivots.iter().enumerate() {
        for j in 0..b.cols() {
            x.set(p, j, aug.get(row, a.cols() + j).clone());
        }
    }
    // Rows below the pivots must have zero RHS entries.
    for row in pivots.len()..aug.rows() {
        for j in 0..b.cols() {
            if !f.is_zero_scaled(aug.get(row, a.cols() + j), scale) {
                return Ok(None);
            }
        }
    }
    Ok(Some(x))
}

//! Dense row-major kernels shared by both solvers.
//!
//! Everything here is plain `f64` arithmetic on contiguous storage. The only
//! factorization is an unpivoted Cholesky; positive definiteness is detected
//! purely through the sign of its pivots.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (|a_ij - a_ji| = {gap:e} at ({row}, {col}))")]
    Asymmetric { row: usize, col: usize, gap: f64 },
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

/// Dense matrix stored row-major. Serialized as an array of rows.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row-major storage.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. All rows must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(LinalgError::DimensionMismatch {
                    expected: ncols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    /// Builds a matrix from a closure over `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Adds `values[i]` to the diagonal entry `(i, i)`.
    pub fn add_diag(&mut self, values: &[f64]) {
        for (i, v) in values.iter().enumerate() {
            self[(i, i)] += v;
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                axpy(a, other.row(k), out_row);
            }
        }
        Ok(out)
    }

    /// Largest `|a_ij - a_ji|` and where it occurs.
    pub fn asymmetry(&self) -> Result<(f64, usize, usize), LinalgError> {
        self.check_square()?;
        let mut worst = (0.0, 0, 0);
        for r in 0..self.rows {
            for c in 0..r {
                let gap = (self[(r, c)] - self[(c, r)]).abs();
                if gap > worst.0 {
                    worst = (gap, r, c);
                }
            }
        }
        Ok(worst)
    }

    /// Checks symmetry within `rel_tol * max|A|`.
    pub fn check_symmetric(&self, rel_tol: f64) -> Result<(), LinalgError> {
        let (gap, row, col) = self.asymmetry()?;
        if gap > rel_tol * self.max_abs() {
            return Err(LinalgError::Asymmetric { row, col, gap });
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<(), LinalgError> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(p) => Err(LinalgError::NonFinite {
                row: p / self.cols.max(1),
                col: p % self.cols.max(1),
            }),
            None => Ok(()),
        }
    }

    fn check_square(&self) -> Result<(), LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for DenseMatrix {
    type Error = LinalgError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        Self::from_rows(&rows)
    }
}

impl From<DenseMatrix> for Vec<Vec<f64>> {
    fn from(m: DenseMatrix) -> Self {
        m.to_rows()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    lower: DenseMatrix,
}

impl CholeskyFactor {
    pub fn n(&self) -> usize {
        self.lower.rows()
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    pub fn into_lower(self) -> DenseMatrix {
        self.lower
    }

    /// Solves `A x = b` by forward then backward substitution.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<(), LinalgError> {
        let n = self.n();
        if x.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        self.forward_in_place(x);
        let l = &self.lower;
        for i in (0..n).rev() {
            let v = x[i] / l[(i, i)];
            x[i] = v;
            // column i of L is row i of Lᵀ; walk it top-down
            for (k, xk) in x.iter_mut().enumerate().take(i) {
                *xk -= l[(i, k)] * v;
            }
        }
        Ok(())
    }

    /// Solves `L y = b` in place (the "half solve").
    pub fn forward_in_place(&self, x: &mut [f64]) {
        let l = &self.lower;
        for i in 0..x.len() {
            let s = dot(&l.row(i)[..i], &x[..i]);
            x[i] = (x[i] - s) / l[(i, i)];
        }
    }

    /// `A⁻¹ B` for a right-hand side matrix `B`, column by column.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if b.rows() != self.n() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n(),
                got: b.rows(),
            });
        }
        let mut out = DenseMatrix::zeros(b.rows(), b.cols());
        let mut col = vec![0.0; b.rows()];
        for c in 0..b.cols() {
            for (r, v) in col.iter_mut().enumerate() {
                *v = b[(r, c)];
            }
            self.solve_in_place(&mut col)?;
            for (r, v) in col.iter().enumerate() {
                out[(r, c)] = *v;
            }
        }
        Ok(out)
    }

    /// Reconstructs `L Lᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.n();
        let l = &self.lower;
        let mut out = DenseMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..=r {
                let v = dot(&l.row(r)[..=c], &l.row(c)[..=c]);
                out[(r, c)] = v;
                out[(c, r)] = v;
            }
        }
        out
    }
}

/// Unpivoted Cholesky factorization of a symmetric matrix.
///
/// Only the lower triangle of `a` is read. Row-oriented so that every inner
/// product runs over contiguous memory.
pub fn cholesky_factor(a: &DenseMatrix) -> Result<CholeskyFactor, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let (head, tail) = l.data.split_at_mut(i * n);
            let lj = &head[j * n..j * n + j];
            let li = &mut tail[..n];
            let s = dot(&li[..j], lj);
            li[j] = (a[(i, j)] - s) / head[j * n + j];
        }
        let li = l.row(i);
        let pivot = a[(i, i)] - dot(&li[..i], &li[..i]);
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { index: i, pivot });
        }
        l[(i, i)] = pivot.sqrt();
    }
    Ok(CholeskyFactor { lower: l })
}

/// `MᵀM` with only the upper triangle computed, so the result is exactly
/// symmetric.
pub fn gram(m: &DenseMatrix) -> DenseMatrix {
    let mt = m.transpose();
    let n = m.cols();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = dot(mt.row(i), mt.row(j));
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

pub fn cholesky_solve(f: &CholeskyFactor, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    f.solve(b)
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
///
/// The result is symmetrized by averaging, so it is exactly symmetric.
pub fn spd_inverse(a: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let f = cholesky_factor(a)?;
    let n = a.rows();
    let mut inv = f.solve_matrix(&DenseMatrix::identity(n))?;
    for r in 0..n {
        for c in 0..r {
            let v = 0.5 * (inv[(r, c)] + inv[(c, r)]);
            inv[(r, c)] = v;
            inv[(c, r)] = v;
        }
    }
    Ok(inv)
}

/// `M ← M + c·v·vᵀ` in place.
///
/// Each entry receives `c·(v_r·v_k)`; floating-point multiplication is
/// commutative, so entries `(r, k)` and `(k, r)` get bit-identical
/// increments and a symmetric `M` stays exactly symmetric.
pub fn rank1_symmetric_update(m: &mut DenseMatrix, c: f64, v: &[f64]) {
    debug_assert!(m.is_square() && m.rows() == v.len());
    if c == 0.0 {
        return;
    }
    let n = v.len();
    for (r, &vr) in v.iter().enumerate() {
        if vr == 0.0 {
            continue;
        }
        let row = &mut m.data[r * n..(r + 1) * n];
        for (x, &vk) in row.iter_mut().zip(v) {
            *x += c * (vr * vk);
        }
    }
}

pub fn matvec(a: &DenseMatrix, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.cols() != x.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.cols(),
            got: x.len(),
        });
    }
    let mut out = vec![0.0; a.rows()];
    matvec_into(a, x, &mut out);
    Ok(out)
}

/// `out ← A x` without allocation. Shapes are the caller's responsibility.
#[inline]
pub fn matvec_into(a: &DenseMatrix, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.cols(), x.len());
    debug_assert_eq!(a.rows(), out.len());
    for (r, o) in out.iter_mut().enumerate() {
        *o = dot(a.row(r), x);
    }
}

/// `Aᵀ x`.
pub fn matvec_transpose(a: &DenseMatrix, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != x.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.rows(),
            got: x.len(),
        });
    }
    let mut out = vec![0.0; a.cols()];
    for (r, &xr) in x.iter().enumerate() {
        axpy(xr, a.row(r), &mut out);
    }
    Ok(out)
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// `y ← y + a·x`.
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_matvec(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.rows()];
        for (r, o) in out.iter_mut().enumerate() {
            for c in 0..a.cols() {
                *o += a[(r, c)] * x[c];
            }
        }
        out
    }

    fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.rows(), b.cols(), |r, c| {
            (0..a.cols()).map(|k| a[(r, k)] * b[(k, c)]).sum()
        })
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let s = DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let mut a = naive_matmul(&s.transpose(), &s);
        a.add_diag(&vec![n as f64 * 0.1 + 0.5; n]);
        a
    }

    fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn cholesky_of_identity_is_identity() {
        let f = cholesky_factor(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(f.lower(), &DenseMatrix::identity(2));
    }

    #[test]
    fn cholesky_two_by_two() {
        let a = DenseMatrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]]).unwrap();
        let f = cholesky_factor(&a).unwrap();
        let l = f.lower();
        assert!((l[(0, 0)] - 2.0).abs() < 1e-15);
        assert_eq!(l[(0, 1)], 0.0);
        assert!((l[(1, 0)] - 1.0).abs() < 1e-15);
        assert!((l[(1, 1)] - 2f64.sqrt()).abs() < 1e-15);
        assert!(max_abs_diff(&f.reconstruct(), &a) < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(
            cholesky_factor(&a),
            Err(LinalgError::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn cholesky_rejects_non_square() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(matches!(cholesky_factor(&a), Err(LinalgError::NotSquare { .. })));
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let f = cholesky_factor(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(cholesky_solve(&f, &[1.0, -2.0, 3.5]).unwrap(), vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn solve_two_by_two_residual() {
        let a = DenseMatrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]]).unwrap();
        let f = cholesky_factor(&a).unwrap();
        let b = [6.0, 5.0];
        let x = cholesky_solve(&f, &b).unwrap();
        let r = naive_matvec(&a, &x);
        assert!(norm_inf(&[r[0] - b[0], r[1] - b[1]]) <= 1e-12);
        // exact answer is (1, 1)
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn solve_dimension_mismatch() {
        let f = cholesky_factor(&DenseMatrix::identity(2)).unwrap();
        assert!(matches!(
            cholesky_solve(&f, &[1.0, 2.0, 3.0]),
            Err(LinalgError::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn inverse_of_diagonal() {
        assert_eq!(spd_inverse(&DenseMatrix::identity(3)).unwrap(), DenseMatrix::identity(3));
        let inv = spd_inverse(&DenseMatrix::from_diag(&[2.0, 4.0])).unwrap();
        assert!(max_abs_diff(&inv, &DenseMatrix::from_diag(&[0.5, 0.25])) <= 1e-15);
    }

    #[test]
    fn inverse_multiplies_back_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_spd(5, &mut rng);
        let inv = spd_inverse(&a).unwrap();
        let prod = naive_matmul(&a, &inv);
        assert!(max_abs_diff(&prod, &DenseMatrix::identity(5)) <= 1e-8 * 5.0);
        assert_eq!(inv.asymmetry().unwrap().0, 0.0);
    }

    #[test]
    fn inverse_rejects_indefinite() {
        let a = DenseMatrix::from_diag(&[1.0, -1.0]);
        assert!(matches!(spd_inverse(&a), Err(LinalgError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn rank1_basic_cases() {
        let mut m = DenseMatrix::identity(3);
        rank1_symmetric_update(&mut m, 1.0, &[1.0, 0.0, 0.0]);
        assert_eq!(m, DenseMatrix::from_diag(&[2.0, 1.0, 1.0]));

        let before = m.clone();
        rank1_symmetric_update(&mut m, 0.0, &[3.0, 1.0, 2.0]);
        assert_eq!(m, before);
    }

    #[test]
    fn sherman_morrison_diagonal_bump() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 6;
        let b = random_spd(n, &mut rng);
        let mut m = spd_inverse(&b).unwrap();
        let i = 2;
        let bump = 3.7;
        let col = m.column(i);
        let c = -bump / (1.0 + bump * m[(i, i)]);
        rank1_symmetric_update(&mut m, c, &col);
        let mut b_new = b.clone();
        b_new[(i, i)] += bump;
        let prod = naive_matmul(&m, &b_new);
        assert!(max_abs_diff(&prod, &DenseMatrix::identity(n)) <= 1e-9);
        assert_eq!(m.asymmetry().unwrap().0, 0.0);
    }

    #[test]
    fn matvec_cases() {
        let x = [1.0, -2.0, 0.5];
        assert_eq!(matvec(&DenseMatrix::identity(3), &x).unwrap(), x.to_vec());
        assert_eq!(matvec(&DenseMatrix::zeros(3, 3), &x).unwrap(), vec![0.0; 3]);
        let a = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [-1.0, 0.5, 4.0], [2.0, 2.0, -7.0]]).unwrap();
        let got = matvec(&a, &x).unwrap();
        let want = naive_matvec(&a, &x);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-15);
        }
        assert!(matches!(matvec(&a, &[1.0]), Err(LinalgError::DimensionMismatch { .. })));
        let t = matvec_transpose(&a, &x).unwrap();
        let want_t = naive_matvec(&a.transpose(), &x);
        for (g, w) in t.iter().zip(&want_t) {
            assert!((g - w).abs() < 1e-15);
        }
    }

    #[test]
    fn dot_handles_tails() {
        for len in 0..11 {
            let a: Vec<f64> = (0..len).map(|i| i as f64 + 1.0).collect();
            let want: f64 = a.iter().map(|v| v * v).sum();
            assert_eq!(dot(&a, &a), want);
        }
    }

    #[test]
    fn symmetry_checks() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.5, 1.0]]).unwrap();
        assert!(matches!(a.check_symmetric(1e-12), Err(LinalgError::Asymmetric { .. })));
        assert!(DenseMatrix::identity(4).check_symmetric(1e-12).is_ok());
    }
}

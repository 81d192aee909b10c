//! Dense complex matrices with the handful of kernels the simulator needs.
//!
//! Matrices are small (MN×MN with MN in the low hundreds) and frequently sparse
//! (indicator-supported bases, band-limited channel operators), so the products
//! below skip structural zeros instead of delegating to a BLAS.

use std::ops::{Index, IndexMut};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Scalar, C};

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix whose `c`-th column is `columns[c]`.
    pub fn from_columns(columns: &[Vec<C<T>>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, cols);
        for (c, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    got: col.len(),
                });
            }
            for (r, v) in col.iter().enumerate() {
                m[(r, c)] = *v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [C<T>] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C<T>> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    /// Column indices of the nonzero entries of each row.
    pub fn row_supports(&self) -> Vec<Vec<usize>> {
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(c, _)| c)
                    .collect()
            })
            .collect()
    }

    /// `self · rhs`, skipping structural zeros of both operands.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        let rhs_support = rhs.row_supports();
        let nnz: usize = rhs_support.iter().map(Vec::len).sum();
        let dense_rhs = 2 * nnz > rhs.rows * rhs.cols;
        for r in 0..self.rows {
            let lhs_row = self.row(r);
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, a) in lhs_row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let b_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                if dense_rhs {
                    for (o, b) in out_row.iter_mut().zip(b_row) {
                        *o += *a * *b;
                    }
                } else {
                    for &c in &rhs_support[k] {
                        out_row[c] += *a * b_row[c];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[C<T>]) -> Result<Vec<C<T>>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(czero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect())
    }

    /// `selfᴴ · x` without forming the adjoint.
    pub fn adjoint_matvec(&self, x: &[C<T>]) -> Result<Vec<C<T>>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: x.len(),
            });
        }
        let mut out = vec![czero(); self.cols];
        for (r, xr) in x.iter().enumerate() {
            if xr.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * *xr;
            }
        }
        Ok(out)
    }

    /// Hermitian product `self · selfᴴ`, accumulated over the nonzeros of each column.
    pub fn outer_gram(&self) -> Self {
        let n = self.rows;
        let mut columns: Vec<Vec<(usize, C<T>)>> = vec![Vec::new(); self.cols];
        for r in 0..n {
            for (c, v) in self.row(r).iter().enumerate() {
                if !v.is_zero() {
                    columns[c].push((r, *v));
                }
            }
        }
        let mut out = Self::zeros(n, n);
        for col in &columns {
            for (a, &(i, vi)) in col.iter().enumerate() {
                let row = &mut out.data[i * n..(i + 1) * n];
                for &(j, vj) in &col[..=a] {
                    row[j] += vi * vj.conj();
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                let v = out.data[i * n + j].conj();
                out.data[j * n + i] = v;
            }
        }
        out
    }

    /// `selfᴴ · self`.
    pub fn inner_gram(&self) -> Self {
        self.adjoint().outer_gram()
    }

    pub fn add_diagonal(&mut self, v: T) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)].re += v;
        }
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: rhs.rows * rhs.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        })
    }

    pub fn frobenius_sq(&self) -> T {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `‖self − rhs‖_F²` without forming the difference.
    pub fn distance_sq(&self, rhs: &Self) -> Result<T> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: rhs.rows * rhs.cols,
            });
        }
        Ok(self.data.iter().zip(&rhs.data).map(|(a, b)| (*a - *b).norm_sqr()).sum())
    }

    /// Largest entry magnitude together with its `(row, col)` position.
    pub fn max_abs(&self) -> (T, (usize, usize)) {
        let mut best = (T::zero(), (0, 0));
        for (idx, v) in self.data.iter().enumerate() {
            let m = v.norm();
            if m > best.0 {
                best = (m, (idx / self.cols, idx % self.cols));
            }
        }
        best
    }

    /// `‖self − I‖_max` with the offending position.
    pub fn identity_deviation(&self) -> (T, (usize, usize)) {
        let mut best = (T::zero(), (0, 0));
        for r in 0..self.rows {
            for c in 0..self.cols {
                let target = if r == c { cone() } else { czero() };
                let m = (self[(r, c)] - target).norm();
                if m > best.0 {
                    best = (m, (r, c));
                }
            }
        }
        best
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(C<T>) -> C<U>) -> CMatrix<U> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C<T> {
        &mut self.data[r * self.cols + c]
    }
}

/// Cholesky factor `A = L Lᴴ` of a Hermitian positive-definite matrix.
///
/// The factorization works on the row envelope of `A` (from the first nonzero of each row
/// to the diagonal), where all fill-in is confined, so banded and cyclically banded systems
/// cost far less than a dense factorization.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    lower: CMatrix<T>,
    first: Vec<usize>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors `a`, reading only its lower triangle.
    ///
    /// Pivots that are non-finite or fall below `ε·max(diag)` are reported as [`Error::Singular`].
    pub fn new(a: &CMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.cols(),
            });
        }
        let first: Vec<usize> = (0..n)
            .map(|i| a.row(i)[..i].iter().position(|v| !v.is_zero()).unwrap_or(i))
            .collect();
        let scale = (0..n).map(|i| a[(i, i)].re).fold(T::zero(), T::max);
        let floor = T::epsilon() * scale;
        let mut l = CMatrix::zeros(n, n);
        for i in 0..n {
            let fi = first[i];
            let (head, tail) = l.data.split_at_mut(i * n);
            let li = &mut tail[..n];
            for j in fi..i {
                let lo = fi.max(first[j]);
                let lj = &head[j * n..j * n + j + 1];
                let mut s = a[(i, j)];
                for (x, y) in li[lo..j].iter().zip(&lj[lo..j]) {
                    s -= *x * y.conj();
                }
                li[j] = s / lj[j].re;
            }
            let mut d = a[(i, i)].re;
            for v in &li[fi..i] {
                d -= v.norm_sqr();
            }
            if !d.is_finite() || d <= floor || d <= T::zero() {
                return Err(Error::Singular);
            }
            li[i] = C::new(d.sqrt(), T::zero());
        }
        Ok(Self { lower: l, first })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C<T>]) -> Result<Vec<C<T>>> {
        let n = self.lower.rows();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let mut s = y[i];
            for (lv, yv) in l.row(i)[fi..i].iter().zip(&y[fi..i]) {
                s -= *lv * *yv;
            }
            y[i] = s / l[(i, i)].re;
        }
        for i in (0..n).rev() {
            let yi = y[i] / l[(i, i)].re;
            y[i] = yi;
            let fi = self.first[i];
            let row = &l.row(i)[fi..i];
            for (yk, lv) in y[fi..i].iter_mut().zip(row) {
                *yk -= lv.conj() * yi;
            }
        }
        Ok(y)
    }
}

/// Inner product `⟨a, b⟩ = Σ a*[n] b[n]`.
pub fn inner<T: Scalar>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter()
        .zip(b)
        .fold(czero(), |acc, (x, y)| acc + x.conj() * *y)
}

pub fn norm_sq<T: Scalar>(a: &[C<T>]) -> T {
    a.iter().map(|v| v.norm_sqr()).sum()
}

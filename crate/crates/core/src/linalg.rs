//! Dense row-major matrices, entrywise kernels and the SVD pseudoinverse.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::svd::{svd, Svd};

/// Dense real matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty);
        }
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                what: "matrix entries",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_row_major_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

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
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Square diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Copy of rows `r0..r1` and columns `c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        Matrix::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(self.mul(other))
    }

    /// Product without the shape check. Row `i` of the result is built as
    /// `sum_k a[i,k] * b[k,:]` with `k` increasing; `matvec` and `vecmat`
    /// use the same accumulation order so products agree bit for bit.
    pub(crate) fn mul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, other.rows);
        let n = other.cols;
        let mut out = Matrix::zeros(self.rows, n);
        for i in 0..self.rows {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(self.cols, x.len());
        let mut out = vec![0.0; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut s = 0.0;
            for (a, xv) in row.iter().zip(x) {
                if *a == 0.0 {
                    continue;
                }
                s += a * xv;
            }
            *o = s;
        }
        out
    }

    /// `xᵀ A` as a plain vector.
    pub fn vecmat(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(self.rows, x.len());
        let mut out = vec![0.0; self.cols];
        for (k, xv) in x.iter().enumerate() {
            if *xv == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(k)) {
                *o += xv * a;
            }
        }
        out
    }

    pub fn abs(&self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Matrix,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    /// Largest absolute entry.
    pub fn max_norm(&self) -> f64 {
        vec_max_norm(&self.data)
    }

    /// Largest absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Largest absolute entry of a vector (0 for an empty one).
pub fn vec_max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Inner product accumulated left to right.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        if *x == 0.0 {
            continue;
        }
        s += x * y;
    }
    s
}

/// `x^‡`: the reciprocal, or 1 for zero.
#[inline]
pub fn dagger(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        1.0 / x
    }
}

/// Entrywise product `a ⊙ b`.
pub fn hadamard(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.zip_with(b, "hadamard", |x, y| x * y)
}

/// Entrywise `a / b` where a zero denominator passes the numerator through.
pub fn pseudo_divide(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.zip_with(b, "pseudo_divide", |x, y| if y == 0.0 { x } else { x / y })
}

/// `(max norm, infinity norm)`.
pub fn norms(m: &Matrix) -> (f64, f64) {
    (m.max_norm(), m.inf_norm())
}

/// Pseudoinverse together with the quantities the condition kernels need.
#[derive(Clone, Debug)]
pub struct PinvBundle {
    /// The input matrix (m×n).
    pub m: Matrix,
    /// `M†` (n×m).
    pub pinv: Matrix,
    pub rank: usize,
    /// `E_M = I − M M†` (m×m).
    pub proj_e: Matrix,
    /// `F_M = I − M† M` (n×n).
    pub proj_f: Matrix,
    /// Absolute singular value cutoff that was applied.
    pub tol_used: f64,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
}

impl PinvBundle {
    /// `‖M†‖₂`, or 0 when the rank is zero.
    pub fn pinv_norm2(&self) -> f64 {
        if self.rank == 0 {
            0.0
        } else {
            1.0 / self.singular_values[self.rank - 1]
        }
    }
}

/// Descending singular values of `m`.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    Ok(svd(m, false)?.s)
}

/// SVD pseudoinverse. Singular values at or below the tolerance are
/// dropped; the default tolerance is `max(m, n) · eps · σ_max`.
pub fn pinv(m: &Matrix, rank_tol: Option<f64>) -> Result<PinvBundle> {
    if let Some(t) = rank_tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument("rank tolerance must be finite and >= 0"));
        }
    }
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::Empty);
    }
    let Svd { s: sv, u, v } = svd(m, true)?;
    let smax = sv.first().copied().unwrap_or(0.0);
    let tol = rank_tol.unwrap_or(rows.max(cols) as f64 * f64::EPSILON * smax);
    let rank = sv.iter().filter(|s| **s > tol).count();

    // M† = V_r Σ_r⁻¹ U_rᵀ
    let mut pinv = Matrix::zeros(cols, rows);
    for l in 0..rank {
        let inv = 1.0 / sv[l];
        for i in 0..cols {
            let vi = v[l][i] * inv;
            if vi == 0.0 {
                continue;
            }
            for j in 0..rows {
                pinv[(i, j)] += vi * u[l][j];
            }
        }
    }
    // Projectors from the singular subspaces: I − U_r U_rᵀ and I − V_r V_rᵀ.
    let complement = |vecs: &[Vec<f64>], n: usize| {
        let mut p = Matrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                let s: f64 = vecs[..rank].iter().map(|x| x[i] * x[j]).sum();
                p[(i, j)] -= s;
            }
        }
        p
    };
    let proj_e = complement(&u, rows);
    let proj_f = complement(&v, cols);
    Ok(PinvBundle {
        m: m.clone(),
        pinv,
        rank,
        proj_e,
        proj_f,
        tol_used: tol,
        singular_values: sv,
    })
}

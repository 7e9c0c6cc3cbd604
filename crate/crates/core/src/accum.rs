//! Compensated (Neumaier) accumulation of nonnegative kernel terms.
//!
//! Every kernel is a sum of many nonnegative contributions. Accumulating
//! them with a running compensation makes the result nearly independent of
//! the order in which terms arrive, so a closed form that groups terms one
//! way and the generic engine that groups them another way agree to a few
//! ulps.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;

#[inline]
fn neumaier(s: &mut f64, c: &mut f64, x: f64) {
    let t = *s + x;
    if s.abs() >= x.abs() {
        *c += (*s - t) + x;
    } else {
        *c += (x - t) + *s;
    }
    *s = t;
}

pub(crate) struct MatAcc {
    rows: usize,
    cols: usize,
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl MatAcc {
    pub(crate) fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            sum: vec![0.0; rows * cols],
            comp: vec![0.0; rows * cols],
        }
    }

    /// `+= (s·|x_a|)·|y_b|`
    pub(crate) fn add_outer(&mut self, x: &[f64], y: &[f64], s: f64) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        for (a, xa) in x.iter().enumerate() {
            let xs = s * xa.abs();
            if xs == 0.0 {
                continue;
            }
            let base = a * self.cols;
            for (b, yb) in y.iter().enumerate() {
                neumaier(&mut self.sum[base + b], &mut self.comp[base + b], xs * yb.abs());
            }
        }
    }

    /// `+= s·|x1_a y1_b − x2_a y2_b|`
    pub(crate) fn add_abs_diff_outer(&mut self, x1: &[f64], y1: &[f64], x2: &[f64], y2: &[f64], s: f64) {
        for a in 0..self.rows {
            let base = a * self.cols;
            for b in 0..self.cols {
                let v = s * (x1[a] * y1[b] - x2[a] * y2[b]).abs();
                neumaier(&mut self.sum[base + b], &mut self.comp[base + b], v);
            }
        }
    }

    /// `+= s·|m|`
    pub(crate) fn add_abs(&mut self, m: &Matrix, s: f64) {
        debug_assert_eq!(m.shape(), (self.rows, self.cols));
        for (k, v) in m.as_slice().iter().enumerate() {
            neumaier(&mut self.sum[k], &mut self.comp[k], s * v.abs());
        }
    }

    /// `+= s·|a − b|`
    pub(crate) fn add_abs_diff(&mut self, a: &Matrix, b: &Matrix, s: f64) {
        for (k, (x, y)) in a.as_slice().iter().zip(b.as_slice()).enumerate() {
            neumaier(&mut self.sum[k], &mut self.comp[k], s * (x - y).abs());
        }
    }

    /// `+= |a|·|b|`, one outer product per inner index.
    pub(crate) fn add_abs_product(&mut self, a: &Matrix, b: &Matrix) {
        debug_assert_eq!(a.cols(), b.rows());
        let col: Vec<Vec<f64>> = (0..a.cols()).map(|k| a.column(k)).collect();
        for (k, ck) in col.iter().enumerate() {
            self.add_outer(ck, b.row(k), 1.0);
        }
    }

    pub(crate) fn finish(self) -> Matrix {
        let data = self.sum.iter().zip(&self.comp).map(|(s, c)| s + c).collect();
        Matrix::from_row_major_unchecked(self.rows, self.cols, data)
    }
}

/// `|a|·|b|` with compensated inner sums.
pub(crate) fn abs_product(a: &Matrix, b: &Matrix) -> Matrix {
    let mut acc = MatAcc::new(a.rows(), b.cols());
    acc.add_abs_product(a, b);
    acc.finish()
}

pub(crate) struct VecAcc {
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl VecAcc {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            sum: vec![0.0; n],
            comp: vec![0.0; n],
        }
    }

    /// `+= s·|x|`
    pub(crate) fn add_scaled(&mut self, x: &[f64], s: f64) {
        if s == 0.0 {
            return;
        }
        for (k, v) in x.iter().enumerate() {
            neumaier(&mut self.sum[k], &mut self.comp[k], s * v.abs());
        }
    }

    /// `+= w·|x1·s1 − x2·s2|`
    pub(crate) fn add_abs_diff(&mut self, x1: &[f64], s1: f64, x2: &[f64], s2: f64, w: f64) {
        for k in 0..self.sum.len() {
            let v = w * (x1[k] * s1 - x2[k] * s2).abs();
            neumaier(&mut self.sum[k], &mut self.comp[k], v);
        }
    }

    /// `+= |a|·|z|`, one scaled column per index of `z`.
    pub(crate) fn add_abs_matvec(&mut self, a: &Matrix, z: &[f64]) {
        for (k, zk) in z.iter().enumerate() {
            self.add_scaled(&a.column(k), zk.abs());
        }
    }

    pub(crate) fn finish(self) -> Vec<f64> {
        self.sum.iter().zip(&self.comp).map(|(s, c)| s + c).collect()
    }
}

/// `|a|·|z|` with compensated sums.
pub(crate) fn abs_matvec(a: &Matrix, z: &[f64]) -> Vec<f64> {
    let mut acc = VecAcc::new(a.rows());
    acc.add_abs_matvec(a, z);
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_insensitive_sum() {
        let terms: Vec<f64> = (1..200).map(|k| 1.0 / ((k * k) as f64) + 1e-3 * k as f64).collect();
        let mut fwd = VecAcc::new(1);
        let mut rev = VecAcc::new(1);
        for t in &terms {
            fwd.add_scaled(&[*t], 1.0);
        }
        for t in terms.iter().rev() {
            rev.add_scaled(&[*t], 1.0);
        }
        assert_eq!(fwd.finish(), rev.finish());
    }

    #[test]
    fn abs_product_matches_plain_product_of_abs() {
        let a = Matrix::from_fn(3, 2, |i, j| (i as f64) - (j as f64) * 2.0);
        let b = Matrix::from_fn(2, 2, |i, j| (i + j) as f64 - 0.5);
        let want = a.abs().mul(&b.abs());
        assert_eq!(abs_product(&a, &b), want);
    }
}

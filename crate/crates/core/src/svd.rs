//! One-sided Jacobi SVD.
//!
//! Orthogonalizes the columns of `A` (or of `Aᵀ` when `A` is wide) by plane
//! rotations. Singular values come out with high relative accuracy and the
//! singular vectors of the nonzero ones are reliable even for exactly
//! rank-deficient input.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const MAX_SWEEPS: usize = 80;

/// Thin SVD, sorted by decreasing singular value. `u[k]` and `v[k]` are the
/// `k`-th left and right singular vectors (empty when not requested).
pub(crate) struct Svd {
    pub(crate) s: Vec<f64>,
    pub(crate) u: Vec<Vec<f64>>,
    pub(crate) v: Vec<Vec<f64>>,
}

pub(crate) fn svd(m: &Matrix, vectors: bool) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let wide = cols > rows;
    // Work on the tall orientation: `cols(a)` columns of length `len`.
    let (len, k) = if wide { (cols, rows) } else { (rows, cols) };
    let mut a: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            (0..len)
                .map(|i| if wide { m[(j, i)] } else { m[(i, j)] })
                .collect()
        })
        .collect();
    let mut w: Vec<Vec<f64>> = if vectors {
        (0..k)
            .map(|j| {
                let mut e = vec![0.0; k];
                e[j] = 1.0;
                e
            })
            .collect()
    } else {
        Vec::new()
    };

    // Columns below this squared norm are numerical noise relative to ‖A‖_F
    // and cannot be orthogonalized any further in double precision.
    let frob2: f64 = a.iter().flatten().map(|v| v * v).sum();
    let floor = frob2 * (f64::EPSILON * f64::EPSILON) * 1e-4;
    let thresh = f64::EPSILON * libm::sqrt(len as f64);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for (x, y) in a[p].iter().zip(&a[q]) {
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0
                    || alpha <= floor
                    || beta <= floor
                    || gamma.abs() <= thresh * libm::sqrt(alpha) * libm::sqrt(beta)
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::hypot(1.0, zeta));
                let c = 1.0 / libm::hypot(1.0, t);
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                if vectors {
                    rotate(&mut w, p, q, c, s);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence {
            iterations: MAX_SWEEPS,
        });
    }

    let norms: Vec<f64> = a
        .iter()
        .map(|col| libm::sqrt(col.iter().map(|v| v * v).sum()))
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|x, y| norms[*y].total_cmp(&norms[*x]));
    let s: Vec<f64> = order.iter().map(|j| norms[*j]).collect();
    if !vectors {
        return Ok(Svd {
            s,
            u: Vec::new(),
            v: Vec::new(),
        });
    }
    // Normalized columns of `a` are the tall-side vectors; `w` holds the other side.
    let mut tall = Vec::with_capacity(k);
    let mut other = Vec::with_capacity(k);
    for &j in &order {
        let nrm = norms[j];
        tall.push(if nrm > 0.0 {
            a[j].iter().map(|v| v / nrm).collect()
        } else {
            vec![0.0; len]
        });
        other.push(core::mem::take(&mut w[j]));
    }
    let (u, v) = if wide { (other, tall) } else { (tall, other) };
    Ok(Svd { s, u, v })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_rank_deficient_product() {
        // rank one: outer product of [1, 2, 3] and [4, 5]
        let m = Matrix::from_fn(3, 2, |i, j| (i as f64 + 1.0) * (j as f64 + 4.0));
        for mat in [m.clone(), m.transpose()] {
            let d = svd(&mat, true).unwrap();
            assert!(d.s[1] <= 1e-14 * d.s[0]);
            let (r, c) = mat.shape();
            for i in 0..r {
                for j in 0..c {
                    let rec = d.s[0] * d.u[0][i] * d.v[0][j];
                    assert!((rec - mat[(i, j)]).abs() <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn diagonal_values_sorted() {
        let d = svd(&Matrix::diag(&[1.0, -3.0, 2.0]), false).unwrap();
        assert_eq!(d.s, vec![3.0, 2.0, 1.0]);
    }
}

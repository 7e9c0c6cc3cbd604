#![allow(dead_code)]

use pinvcond_core::cv::CvParams;
use pinvcond_core::qs::{GvTangentParams, QsParams};
use pinvcond_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const EPS: f64 = f64::EPSILON;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Random dense matrix; every fourth seed is a rank-deficient product of
/// thin factors.
pub fn random_matrix(rng: &mut ChaCha8Rng, max_dim: usize) -> Matrix {
    let m = rng.random_range(1..=max_dim);
    let n = rng.random_range(1..=max_dim);
    if rng.random_range(0..4) == 0 && m.min(n) > 1 {
        let k = rng.random_range(1..m.min(n));
        let a = Matrix::from_row_major(m, k, normal(rng, m * k)).unwrap();
        let b = Matrix::from_row_major(k, n, normal(rng, k * n)).unwrap();
        a.matmul(&b).unwrap()
    } else {
        Matrix::from_row_major(m, n, normal(rng, m * n)).unwrap()
    }
}

/// CV nodes with `c` in (0.2, 1.2) and `d` in (1.5, 3): never colliding.
/// Occasionally duplicates `c_1` into `c_2`, giving equal rows.
pub fn random_cv(rng: &mut ChaCha8Rng) -> CvParams {
    let m = rng.random_range(2..=8);
    let n = rng.random_range(1..=8);
    let l = rng.random_range(0..=n.min(4));
    let mut c: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..1.2)).collect();
    if rng.random_range(0..4) == 0 {
        c[1] = c[0];
    }
    let d: Vec<f64> = (0..l).map(|_| rng.random_range(1.5..3.0)).collect();
    CvParams::new(c, d, n).unwrap()
}

pub fn random_qs(rng: &mut ChaCha8Rng, n: usize) -> QsParams {
    let n1 = n - 1;
    let n2 = n - 2;
    QsParams::new(
        normal(rng, n1),
        normal(rng, n2),
        normal(rng, n1),
        normal(rng, n),
        normal(rng, n1),
        normal(rng, n2),
        normal(rng, n1),
    )
    .unwrap()
}

pub fn random_gv(rng: &mut ChaCha8Rng, n: usize) -> GvTangentParams {
    GvTangentParams::new(
        normal(rng, n - 2),
        normal(rng, n - 1),
        normal(rng, n),
        normal(rng, n - 1),
        normal(rng, n - 2),
    )
    .unwrap()
}

/// Zero diagonal, `v_1 = 0`, `v_{n−1} = 100`: rank deficient.
pub fn deficient_gv(rng: &mut ChaCha8Rng, n: usize) -> GvTangentParams {
    let mut p = random_gv(rng, n);
    p.d = vec![0.0; n];
    p.v[0] = 0.0;
    p.v[n - 2] = 100.0;
    p
}

/// `σ_max / σ_r` over the numerically nonzero singular values.
pub fn kappa(m: &Matrix) -> f64 {
    let b = pinvcond_core::pinv(m, None).unwrap();
    if b.rank == 0 {
        return f64::INFINITY;
    }
    b.singular_values[0] / b.singular_values[b.rank - 1]
}

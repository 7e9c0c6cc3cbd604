//! Seeded instance generators for the published experiments.
//!
//! Instance `i` of a corpus with master seed `s` draws from ChaCha8 seeded
//! with `s` on stream `i`, so corpora are reproducible instance by instance
//! and independent of evaluation order.

use pinvcond_core::cv::CvParams;
use pinvcond_core::qs::{GvTangentParams, QsParams};
use pinvcond_core::Result;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

pub fn normal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// 5×6 rank-4 CV matrix with a repeated node.
pub fn example_cv_small() -> CvParams {
    CvParams::new(
        vec![1.0, 1.0, 0.5, -1.0 / 30.0, 1.0 / 40.0],
        vec![12.0, -0.75e7, 25e3],
        6,
    )
    .expect("fixed nodes are distinct")
}

/// Nodes `c_i = i/20` (i = 1..12) and `d_j = (j+4)/50` (j = 1..8) of the
/// 12×20 CV example. They collide at `c_2 = d_1` and `c_4 = d_6`.
pub fn example_cv_large_nodes() -> (Vec<f64>, Vec<f64>) {
    let c = (1..=12).map(|i| i as f64 / 20.0).collect();
    let d = (1..=8).map(|j| (j as f64 + 4.0) / 50.0).collect();
    (c, d)
}

pub const EXAMPLE_CV_LARGE_N: usize = 20;

/// Standard normal generators, drawn in the order `a, b, e, d, f, g, h`.
pub fn qs_randn(rng: &mut ChaCha8Rng, n: usize) -> QsParams {
    let a = normal(rng, n - 1);
    let b = normal(rng, n - 1);
    let e = normal(rng, n - 2);
    let d = normal(rng, n);
    let f = normal(rng, n - 1);
    let g = normal(rng, n - 2);
    let h = normal(rng, n - 1);
    QsParams { a, e, b, d, f, g, h }
}

/// [`qs_randn`] with `a`, `e` and `h` multiplied by `10^k`.
pub fn qs_unbalanced(rng: &mut ChaCha8Rng, n: usize, k: i32) -> QsParams {
    let mut p = qs_randn(rng, n);
    let s = 10f64.powi(k);
    for v in p.a.iter_mut().chain(p.e.iter_mut()).chain(p.h.iter_mut()) {
        *v *= s;
    }
    p
}

/// Rank-deficient tangent generators: normal `t, u, v, w`, zero diagonal,
/// first entry of `v` set to 0 and last to 100.
pub fn gv_deficient(rng: &mut ChaCha8Rng, n: usize) -> Result<GvTangentParams> {
    let t = normal(rng, n - 2);
    let u = normal(rng, n - 1);
    let mut v = normal(rng, n - 1);
    let w = normal(rng, n - 2);
    v[0] = 0.0;
    v[n - 2] = 100.0;
    GvTangentParams::new(t, u, vec![0.0; n], v, w)
}

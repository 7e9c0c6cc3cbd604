mod common;

use common::*;
use pinvcond_core::framework::{ls_cn_upper_with, pinv_cn_upper_with};
use pinvcond_core::oracle::fd_check;
use pinvcond_core::qs::{
    build_qs, compare_all, cos_sin, gv_derivatives, gv_expand, gv_ls_cn_upper, gv_pinv_cn_upper,
    qs_derivatives, qs_effective_ls_cn, qs_effective_pinv_cn, qs_ls_cn_upper, qs_ones,
    qs_pinv_cn_upper, rescale_qs_representation, split_ldu, GvTangentParams, QsInstance,
    QsParams,
};
use pinvcond_core::{pinv, CnReport, Error, LsProblem, Matrix, MatrixModel};

fn close(a: &CnReport, b: &CnReport, tol: f64) -> bool {
    rel(a.mixed, b.mixed) <= tol && rel(a.componentwise, b.componentwise) <= tol
}

/// Descriptors and parameters with the `e` and `g` groups removed.
fn without_chains(p: &QsParams) -> (Vec<pinvcond_core::Derivative>, Vec<f64>) {
    let n = p.n();
    let derivs = qs_derivatives(p);
    let psi = p.psi();
    let e = (n - 1)..(2 * n - 3);
    let g = (5 * n - 5)..(6 * n - 7);
    let keep = |k: &usize| !e.contains(k) && !g.contains(k);
    (
        derivs.iter().enumerate().filter(|(k, _)| keep(k)).map(|(_, d)| d.clone()).collect(),
        psi.iter().enumerate().filter(|(k, _)| keep(k)).map(|(_, v)| *v).collect(),
    )
}

#[test]
fn all_ones_and_zero_b() {
    let m = build_qs(&qs_ones(3));
    assert_eq!(m, Matrix::from_row_major(3, 3, vec![1.0; 9]).unwrap());
    let mut p = qs_ones(4);
    p.b = vec![0.0; 3];
    let m = build_qs(&p);
    for i in 0..4 {
        for j in 0..i {
            assert_eq!(m[(i, j)], 0.0);
        }
    }
}

#[test]
fn split_examples() {
    let s = split_ldu(&Matrix::identity(3)).unwrap();
    assert_eq!(s.l, Matrix::zeros(3, 3));
    assert_eq!(s.um, Matrix::zeros(3, 3));
    assert_eq!(s.dm, Matrix::identity(3));
    let s = split_ldu(&build_qs(&qs_ones(3))).unwrap();
    let ones = |m: &Matrix| m.as_slice().iter().filter(|v| **v == 1.0).count();
    assert_eq!((ones(&s.l), ones(&s.dm), ones(&s.um)), (3, 3, 3));
    assert!(split_ldu(&Matrix::zeros(2, 3)).is_err());
}

#[test]
fn d_descriptor_is_unit() {
    let p = qs_ones(4);
    let d = qs_derivatives(&p);
    let first_d = 3 + 2 + 3;
    for i in 0..4 {
        let g = d[first_d + i].to_dense(4, 4);
        assert_eq!(g, Matrix::from_fn(4, 4, |a, b| if a == i && b == i { 1.0 } else { 0.0 }));
        assert!(!d[first_d + i].premultiplied);
    }
}

#[test]
fn tangent_zero_leaves_subdiagonal() {
    let mut r = rng(1);
    let mut p = random_gv(&mut r, 5);
    p.t = vec![0.0; 3];
    let (q, m) = gv_expand(&p);
    for i in 0..5 {
        for j in 0..i {
            if i == j + 1 {
                assert_eq!(m[(i, j)], q.a[i - 1] * p.u[j]);
            } else {
                assert_eq!(m[(i, j)], 0.0);
            }
        }
    }
    // K_i with t_i = 0 is the pure p² block below row i
    let d = gv_derivatives(&p);
    let k0 = d[0].to_dense(5, 5);
    for j in 0..5 {
        assert_eq!(k0[(1, j)], 0.0);
    }
    assert_eq!(k0[(2, 0)], m[(2, 0)]);
}

#[test]
fn tangent_w_zero_leaves_superdiagonal() {
    let mut r = rng(2);
    let mut p = random_gv(&mut r, 5);
    p.w = vec![0.0; 3];
    let (_, m) = gv_expand(&p);
    for i in 0..5 {
        for j in i + 2..5 {
            assert_eq!(m[(i, j)], 0.0);
        }
    }
}

#[test]
fn cos_sin_pairs_are_unit() {
    for t in [0.0, 1e-300, 0.3, -2.5, 1e8, -1e150, 1e150, f64::MAX] {
        let (c, s) = cos_sin(t);
        assert!((c * c + s * s - 1.0).abs() <= 4.0 * EPS, "t = {t}");
    }
}

#[test]
fn deficient_recipe_is_rank_deficient() {
    let mut r = rng(64);
    for n in [5, 10, 30] {
        for _ in 0..5 {
            let p = deficient_gv(&mut r, n);
            let (_, m) = gv_expand(&p);
            assert!(pinv(&m, None).unwrap().rank < n);
        }
    }
}

#[test]
fn rescaling_keeps_matrix() {
    let mut r = rng(3);
    let p = random_qs(&mut r, 6);
    let m = build_qs(&p);
    for tau in [2.0, 1e-3, 1e3] {
        let q = rescale_qs_representation(&p, tau).unwrap();
        let mq = build_qs(&q);
        for (a, b) in m.as_slice().iter().zip(mq.as_slice()) {
            assert!(rel(*a, *b) <= 4.0 * EPS);
        }
    }
    assert_eq!(rescale_qs_representation(&p, 1.0).unwrap(), p);
    assert!(rescale_qs_representation(&p, 0.0).is_err());
}

#[test]
fn closed_forms_match_generic_engine() {
    let mut r = rng(5100);
    for k in 0..50 {
        let n = 3 + k % 10;
        let (qsp, gvp) = if k % 3 == 0 {
            let g = deficient_gv(&mut r, n);
            (gv_expand(&g).0, g)
        } else {
            (random_qs(&mut r, n), random_gv(&mut r, n))
        };
        let b = normal(&mut r, n);

        let m = build_qs(&qsp);
        let bundle = pinv(&m, None).unwrap();
        let prob = LsProblem::new(&m, &b, None).unwrap();
        let derivs = qs_derivatives(&qsp);
        let psi = qsp.psi();
        let g = pinv_cn_upper_with(&bundle, &derivs, &psi).unwrap();
        assert!(close(&g, &qs_pinv_cn_upper(&qsp, None).unwrap(), 8.0 * EPS), "k = {k}");
        let g = ls_cn_upper_with(&prob, &derivs, &psi).unwrap();
        assert!(close(&g, &qs_ls_cn_upper(&qsp, &b, None).unwrap(), 8.0 * EPS));
        let (dr, ps) = without_chains(&qsp);
        let g = pinv_cn_upper_with(&bundle, &dr, &ps).unwrap();
        assert!(close(&g, &qs_effective_pinv_cn(&qsp, None).unwrap(), 8.0 * EPS));
        let g = ls_cn_upper_with(&prob, &dr, &ps).unwrap();
        assert!(close(&g, &qs_effective_ls_cn(&qsp, &b, None).unwrap(), 8.0 * EPS));

        let (_, m) = gv_expand(&gvp);
        let bundle = pinv(&m, None).unwrap();
        let prob = LsProblem::new(&m, &b, None).unwrap();
        let derivs = gv_derivatives(&gvp);
        let psi = gvp.psi();
        let g = pinv_cn_upper_with(&bundle, &derivs, &psi).unwrap();
        assert!(close(&g, &gv_pinv_cn_upper(&gvp, None).unwrap(), 8.0 * EPS));
        let g = ls_cn_upper_with(&prob, &derivs, &psi).unwrap();
        assert!(close(&g, &gv_ls_cn_upper(&gvp, &b, None).unwrap(), 8.0 * EPS));
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let mut r = rng(5200);
    for k in 0..50 {
        let n = 2 + k % 9;
        let q = random_qs(&mut r, n);
        let rep = fd_check(&q.model(), &q.psi(), 1e-6).unwrap();
        assert!(rep.max_rel_error <= 1e-6, "qs n={n}: {rep:?}");
        let g = random_gv(&mut r, n);
        let rep = fd_check(&g.model(), &g.psi(), 1e-6).unwrap();
        assert!(rep.max_rel_error <= 1e-6, "gv n={n}: {rep:?}");
    }
}

#[test]
fn zero_parameters_are_skipped_by_fd() {
    let mut p = qs_ones(4);
    p.a[0] = 0.0;
    let rep = fd_check(&p.model(), &p.psi(), 1e-6).unwrap();
    assert_eq!(rep.skipped_zero, vec![0]);
}

#[test]
fn comparisons_pass() {
    let mut r = rng(5300);
    for n in [2, 3, 5, 8] {
        for _ in 0..10 {
            let b = normal(&mut r, n);
            let c = compare_all(&QsInstance::Gv(random_gv(&mut r, n)), Some(&b), None).unwrap();
            assert!(c.all_pass(), "{:?}", c.verdicts.iter().filter(|v| !v.pass).collect::<Vec<_>>());
            assert!(c.verdicts.iter().any(|v| v.name == "gv<=qs"));
            let c = compare_all(&QsInstance::Qs(random_qs(&mut r, n.max(2))), Some(&b), None)
                .unwrap();
            assert!(c.all_pass());
        }
    }
}

#[test]
fn scaling_recipe_keeps_verdicts() {
    let mut r = rng(5400);
    for n in [5, 7, 10] {
        let base = random_qs(&mut r, n);
        let b = normal(&mut r, n);
        for k in -2..=3 {
            let s = 10f64.powi(k);
            let mut p = base.clone();
            for v in p.a.iter_mut().chain(p.e.iter_mut()).chain(p.h.iter_mut()) {
                *v *= s;
            }
            let c = compare_all(&QsInstance::Qs(p), Some(&b), None).unwrap();
            assert!(c.all_pass(), "n={n} k={k}");
        }
    }
}

#[test]
fn representation_independence() {
    let mut r = rng(5500);
    for _ in 0..20 {
        let n = 3 + r.clone().next_u64_mod(8);
        let p = random_qs(&mut r, n);
        let b = normal(&mut r, n);
        let base = qs_pinv_cn_upper(&p, None).unwrap();
        let base_ls = qs_ls_cn_upper(&p, &b, None).unwrap();
        for tau in [1e-3, 1e3] {
            let q = rescale_qs_representation(&p, tau).unwrap();
            assert!(close(&base, &qs_pinv_cn_upper(&q, None).unwrap(), 1e-10));
            assert!(close(&base_ls, &qs_ls_cn_upper(&q, &b, None).unwrap(), 1e-10));
        }
    }
}

#[test]
fn invalid_lengths() {
    let mut p = qs_ones(4);
    p.e.pop();
    assert!(matches!(p.validate(), Err(Error::LengthMismatch { .. })));
    assert!(GvTangentParams::from_psi(4, &[0.0; 13]).is_err());
    assert!(QsParams::from_psi(1, &[]).is_err());
    let g = GvTangentParams::from_psi(4, &[0.5; 14]).unwrap();
    assert_eq!(g.model().param_count(), 14);
}

trait ModN {
    fn next_u64_mod(self, n: usize) -> usize;
}

impl ModN for rand_chacha::ChaCha8Rng {
    fn next_u64_mod(mut self, n: usize) -> usize {
        use rand::RngCore;
        (self.next_u64() % n as u64) as usize
    }
}

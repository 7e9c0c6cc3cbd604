mod common;

use common::*;
use pinvcond_core::cv::{
    build_cv, collisions, cv_aux, cv_derivatives, cv_ls_cn_exact_fullrank, cv_ls_cn_upper,
    cv_pinv_cn_exact_fullrank, cv_pinv_cn_upper, CvParams,
};
use pinvcond_core::framework::{
    ls_cn_exact_fullrank_with, ls_cn_upper_with, pinv_cn_exact_fullrank_with, pinv_cn_upper_with,
};
use pinvcond_core::oracle::{estimate_pinv_cn, fd_check, Mode, PerturbSpec};
use pinvcond_core::{pinv, CnReport, Error, LsProblem, Matrix};

fn close(a: &CnReport, b: &CnReport, tol: f64) -> bool {
    rel(a.mixed, b.mixed) <= tol && rel(a.componentwise, b.componentwise) <= tol
}

#[test]
fn one_by_two_values() {
    let p = CvParams::new(vec![2.0], vec![1.0], 2).unwrap();
    assert_eq!(build_cv(&p), Matrix::from_row_major(1, 2, vec![1.0, 1.0]).unwrap());
    let aux = cv_aux(&p).unwrap();
    assert_eq!(aux.m1.as_slice(), &[-1.0, 0.0]);
    assert_eq!(aux.m2.as_slice(), &[1.0, 0.0]);
    assert_eq!(aux.q.as_slice(), &[1.0, 1.0]);
    let d = cv_derivatives(&p).unwrap();
    assert_eq!(d[0].to_dense(1, 2).as_slice(), &[-1.0, 0.0]);
    assert_eq!(d[1].to_dense(1, 2).as_slice(), &[1.0, 0.0]);
}

#[test]
fn vandermonde_special_case() {
    let p = CvParams::new(vec![2.0, 3.0], vec![], 2).unwrap();
    assert_eq!(build_cv(&p).as_slice(), &[1.0, 2.0, 1.0, 3.0]);
    let aux = cv_aux(&p).unwrap();
    assert_eq!(aux.m2, Matrix::zeros(2, 2));
    assert_eq!(aux.d_ext, vec![0.0, 0.0]);
}

#[test]
fn cauchy_special_case_allows_zero_node() {
    let p = CvParams::new(vec![0.0, 1.0], vec![-1.0, -2.0], 2).unwrap();
    let aux = cv_aux(&p).unwrap();
    let m = build_cv(&p);
    assert_eq!(aux.m1, m.scale(-1.0));
    assert_eq!(aux.m2, m);
    // one Vandermonde column of degree zero still allows c_i = 0
    let p = CvParams::new(vec![0.0, 1.0], vec![-1.0], 2).unwrap();
    assert!(cv_aux(&p).is_ok());
    let p = CvParams::new(vec![0.0, 1.0], vec![-1.0], 3).unwrap();
    assert_eq!(cv_aux(&p).unwrap_err(), Error::ZeroNode { index: 0 });
}

#[test]
fn collision_is_rejected() {
    let c: Vec<f64> = (1..=12).map(|i| i as f64 / 20.0).collect();
    let d: Vec<f64> = (1..=8).map(|j| (j + 4) as f64 / 50.0).collect();
    let hits = collisions(&c, &d);
    assert!(hits.contains(&(1, 0)));
    assert!(matches!(CvParams::new(c, d, 20), Err(Error::NodeCollision { .. })));
}

#[test]
fn square_cauchy_exact_below_upper() {
    let p = CvParams::new(vec![1.0, 2.0], vec![-1.0, -2.0], 2).unwrap();
    let e = cv_pinv_cn_exact_fullrank(&p, None).unwrap();
    let u = cv_pinv_cn_upper(&p, None).unwrap();
    assert!(e.mixed <= u.mixed * (1.0 + 8.0 * EPS));
    assert!(e.componentwise <= u.componentwise * (1.0 + 8.0 * EPS));
}

#[test]
fn ls_zero_rhs_is_degenerate() {
    let p = CvParams::new(vec![1.0, 2.0, 3.0], vec![-1.0], 2).unwrap();
    assert!(matches!(cv_ls_cn_upper(&p, &[0.0; 3], None), Err(Error::Degenerate(_))));
}

#[test]
fn closed_forms_match_generic_engine() {
    let mut r = rng(4100);
    let mut full_rank = 0;
    for _ in 0..50 {
        let p = random_cv(&mut r);
        let m = build_cv(&p);
        let b = normal(&mut r, p.m());
        let psi = p.psi();
        let derivs = cv_derivatives(&p).unwrap();
        let bundle = pinv(&m, None).unwrap();
        let g = pinv_cn_upper_with(&bundle, &derivs, &psi).unwrap();
        let c = cv_pinv_cn_upper(&p, None).unwrap();
        assert!(close(&g, &c, 8.0 * EPS), "{g:?} vs {c:?}");
        let prob = LsProblem::new(&m, &b, None).unwrap();
        let g = ls_cn_upper_with(&prob, &derivs, &psi).unwrap();
        let c = cv_ls_cn_upper(&p, &b, None).unwrap();
        assert!(close(&g, &c, 8.0 * EPS));
        if bundle.rank == p.n() {
            full_rank += 1;
            let g = pinv_cn_exact_fullrank_with(&bundle, &derivs, &psi).unwrap();
            let c = cv_pinv_cn_exact_fullrank(&p, None).unwrap();
            assert!(close(&g, &c, 8.0 * EPS));
            let g = ls_cn_exact_fullrank_with(&prob, &derivs, &psi).unwrap();
            let c = cv_ls_cn_exact_fullrank(&p, &b, None).unwrap();
            assert!(close(&g, &c, 8.0 * EPS));
        } else {
            assert!(matches!(
                cv_pinv_cn_exact_fullrank(&p, None),
                Err(Error::NotFullColumnRank { .. })
            ));
        }
    }
    assert!(full_rank >= 10, "corpus should mix ranks, got {full_rank}");
}

#[test]
fn derivatives_match_finite_differences() {
    let mut r = rng(4200);
    for _ in 0..50 {
        let p = random_cv(&mut r);
        let rep = fd_check(&p.model(), &p.psi(), 1e-6).unwrap();
        assert!(rep.max_rel_error <= 1e-6, "{rep:?}");
        assert!(rep.skipped_domain.is_empty());
    }
}

#[test]
fn small_instances_match_vertex_oracle() {
    let spec = PerturbSpec {
        mode: Mode::Extrapolated,
        ..PerturbSpec::default()
    };
    let mut r = rng(4300);
    let mut checked = 0;
    while checked < 10 {
        let p = random_cv(&mut r);
        let m = build_cv(&p);
        // finite differences cannot resolve 1e-6 on badly conditioned nodes
        if p.m() + p.l() > 8 || pinv(&m, None).unwrap().rank != p.n() || kappa(&m) > 1e3 {
            continue;
        }
        checked += 1;
        let exact = cv_pinv_cn_exact_fullrank(&p, None).unwrap();
        let est = estimate_pinv_cn(&p.model(), &p.psi(), &spec, None).unwrap();
        assert!(rel(est.mixed_lb, exact.mixed) <= 1e-6, "{est:?} vs {exact:?}");
        assert!(rel(est.componentwise_lb, exact.componentwise) <= 1e-6);
    }
}

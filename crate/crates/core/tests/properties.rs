mod common;

use common::{kappa, normal, random_cv, random_matrix, rel, rng, EPS};
use pinvcond_core::cv::{cv_ls_cn_exact_fullrank, cv_ls_cn_upper, cv_pinv_cn_exact_fullrank, cv_pinv_cn_upper};
use pinvcond_core::oracle::{estimate_ls_cn, estimate_pinv_cn, Mode, PerturbSpec};
use pinvcond_core::{
    entrywise_model, hadamard, ls_cn_unstructured, ls_cn_upper, pinv, pinv_cn_range_restricted,
    pinv_cn_unstructured, pinv_cn_upper, pseudo_divide, Matrix,
};
use proptest::prelude::*;

fn matrix_strategy(max_dim: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(m, n)| {
        proptest::collection::vec(-10.0..10.0f64, m * n)
            .prop_map(move |v| Matrix::from_row_major(m, n, v).unwrap())
    })
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).unwrap().max_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // The four Moore-Penrose conditions, with a bound that scales with the
    // conditioning of the retained part.
    #[test]
    fn penrose_conditions(seed in any::<u64>()) {
        let m = random_matrix(&mut rng(seed), 9);
        let b = pinv(&m, None).unwrap();
        prop_assume!(b.rank > 0);
        let x = &b.pinv;
        let k = kappa(&m);
        let (r, c) = m.shape();
        let slack = 50.0 * r.max(c) as f64 * EPS * k;
        let mxm = m.matmul(x).unwrap().matmul(&m).unwrap();
        prop_assert!(max_abs_diff(&mxm, &m) <= slack * m.max_norm());
        let xmx = x.matmul(&m).unwrap().matmul(x).unwrap();
        prop_assert!(max_abs_diff(&xmx, x) <= slack * k * x.max_norm());
        let mx = m.matmul(x).unwrap();
        prop_assert!(max_abs_diff(&mx, &mx.transpose()) <= slack);
        let xm = x.matmul(&m).unwrap();
        prop_assert!(max_abs_diff(&xm, &xm.transpose()) <= slack);
    }

    #[test]
    fn pseudo_divide_undoes_hadamard(a in matrix_strategy(6), seed in any::<u64>()) {
        let (r, c) = a.shape();
        let mut g = rng(seed);
        let mut bv = normal(&mut g, r * c);
        for (i, v) in bv.iter_mut().enumerate() {
            if i % 3 == 0 {
                *v = 0.0;
            }
        }
        let b = Matrix::from_row_major(r, c, bv).unwrap();
        let back = pseudo_divide(&hadamard(&a, &b).unwrap(), &b).unwrap();
        for i in 0..r {
            for j in 0..c {
                if b[(i, j)] == 0.0 {
                    prop_assert_eq!(back[(i, j)], 0.0);
                } else {
                    prop_assert!(rel(back[(i, j)], a[(i, j)]) <= 2.0 * EPS);
                }
            }
        }
    }

    // Condition numbers are invariant under M → αM and b → βb.
    #[test]
    fn unstructured_scale_invariance(seed in any::<u64>(), alpha in 1e-3..1e3f64, beta in 1e-3..1e3f64) {
        let mut g = rng(seed);
        let m = random_matrix(&mut g, 7);
        let b = normal(&mut g, m.rows());
        let base = pinv_cn_unstructured(&m, None).unwrap();
        prop_assume!(base.rank > 0 && kappa(&m) < 1e6);
        let scaled = pinv_cn_unstructured(&m.scale(alpha), None).unwrap();
        prop_assert_eq!(base.rank, scaled.rank);
        prop_assert!(rel(base.mixed, scaled.mixed) <= 1e-9);
        prop_assert!(rel(base.componentwise, scaled.componentwise) <= 1e-9);
        let Ok(ls) = ls_cn_unstructured(&m, &b, None) else { return Ok(()) };
        let bs: Vec<f64> = b.iter().map(|v| v * beta).collect();
        let ls2 = ls_cn_unstructured(&m.scale(alpha), &bs, None).unwrap();
        prop_assert!(rel(ls.mixed, ls2.mixed) <= 1e-9);
    }

    // Treating every entry as a parameter reproduces the unstructured
    // numbers, and the range-restricted part never exceeds the full bound.
    #[test]
    fn entrywise_model_is_unstructured(seed in any::<u64>()) {
        let mut g = rng(seed);
        let m = random_matrix(&mut g, 7);
        let b = normal(&mut g, m.rows());
        let (model, psi) = entrywise_model(&m);
        let Ok(un) = pinv_cn_unstructured(&m, None) else { return Ok(()) };
        let st = pinv_cn_upper(&model, &psi, None).unwrap();
        prop_assert!(rel(un.mixed, st.mixed) <= 8.0 * EPS);
        prop_assert!(rel(un.componentwise, st.componentwise) <= 8.0 * EPS);
        let rr = pinv_cn_range_restricted(&model, &psi, None).unwrap();
        prop_assert!(rr.mixed <= st.mixed * (1.0 + 1e-12));
        prop_assert!(rr.componentwise <= st.componentwise * (1.0 + 1e-12));
        if let Ok(lu) = ls_cn_unstructured(&m, &b, None) {
            let ls = ls_cn_upper(&model, &psi, &b, None).unwrap();
            prop_assert!(rel(lu.mixed, ls.mixed) <= 8.0 * EPS);
            prop_assert!(rel(lu.componentwise, ls.componentwise) <= 8.0 * EPS);
        }
    }

    #[test]
    fn exact_never_exceeds_upper(seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = random_cv(&mut g);
        let b = normal(&mut g, p.m());
        let Ok(up) = cv_pinv_cn_upper(&p, None) else { return Ok(()) };
        prop_assume!(up.rank == p.n());
        let ex = cv_pinv_cn_exact_fullrank(&p, None).unwrap();
        prop_assert!(ex.mixed <= up.mixed * (1.0 + 1e-12));
        prop_assert!(ex.componentwise <= up.componentwise * (1.0 + 1e-12));
        if let (Ok(lu), Ok(le)) = (cv_ls_cn_upper(&p, &b, None), cv_ls_cn_exact_fullrank(&p, &b, None)) {
            prop_assert!(le.mixed <= lu.mixed * (1.0 + 1e-12));
            prop_assert!(le.componentwise <= lu.componentwise * (1.0 + 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    // Perturbation estimates are lower bounds of the first-order bound.
    #[test]
    fn oracle_below_upper(seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = random_cv(&mut g);
        prop_assume!(p.psi().len() <= 12);
        let m = pinvcond_core::cv::build_cv(&p);
        prop_assume!(kappa(&m) <= 1e2);
        let model = p.model();
        let psi = p.psi();
        let spec = PerturbSpec { mode: Mode::Extrapolated, ..PerturbSpec::default() };
        let up = cv_pinv_cn_upper(&p, None).unwrap();
        let est = estimate_pinv_cn(&model, &psi, &spec, None).unwrap();
        if !est.inconclusive {
            prop_assert!(est.mixed_lb <= up.mixed * (1.0 + 1e-8));
            prop_assert!(est.componentwise_lb <= up.componentwise * (1.0 + 1e-8));
        }
        let b = normal(&mut g, p.m());
        if let Ok(lu) = cv_ls_cn_upper(&p, &b, None) {
            let le = estimate_ls_cn(&model, &psi, &b, &spec, None).unwrap();
            if !le.inconclusive {
                prop_assert!(le.mixed_lb <= lu.mixed * (1.0 + 1e-8));
            }
        }
    }
}

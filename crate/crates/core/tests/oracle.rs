mod common;

use common::{normal, rng};
use pinvcond_core::cv::CvParams;
use pinvcond_core::oracle::{
    estimate_ls_cn, estimate_pinv_cn, sample_perturbation, Mode, PerturbSpec, Rejection, Sample,
};
use pinvcond_core::{entrywise_model, Derivative, Error, Matrix, MatrixModel, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Wide CV with a repeated node: rank 3, rank 4 once the copies separate.
fn repeated_cv() -> CvParams {
    CvParams::new(vec![1.0, 1.0, 0.5, 0.25], vec![2.0, 3.0], 5).unwrap()
}

fn tiny() -> PerturbSpec {
    PerturbSpec {
        epsilon: 1e-7,
        ..PerturbSpec::default()
    }
}

fn mc(trials: usize, seed: u64) -> PerturbSpec {
    PerturbSpec {
        mode: Mode::MonteCarlo,
        trials,
        seed,
        ..PerturbSpec::default()
    }
}

#[test]
fn monte_carlo_is_deterministic_and_monotone() {
    let m = Matrix::from_row_major(3, 2, vec![1.0, 2.0, -1.0, 0.5, 3.0, 1.0]).unwrap();
    let (model, psi) = entrywise_model(&m);
    let a = estimate_pinv_cn(&model, &psi, &mc(50, 7), None).unwrap();
    let b = estimate_pinv_cn(&model, &psi, &mc(50, 7), None).unwrap();
    assert_eq!(a, b);
    let mut last = (0.0, 0.0);
    for trials in [1, 5, 20, 100, 400] {
        let e = estimate_pinv_cn(&model, &psi, &mc(trials, 7), None).unwrap();
        assert!(e.mixed_lb >= last.0 && e.componentwise_lb >= last.1);
        last = (e.mixed_lb, e.componentwise_lb);
    }
    let other = estimate_pinv_cn(&model, &psi, &mc(50, 8), None).unwrap();
    assert_ne!(a.achiever, other.achiever);
}

// Equal rows stay equal only when both copies of the repeated node move
// together; the vertex set splits evenly between the two cases.
#[test]
fn repeated_node_splits_vertices() {
    let p = repeated_cv();
    let model = p.model();
    let psi = p.psi();
    let e = estimate_pinv_cn(&model, &psi, &tiny(), None).unwrap();
    assert_eq!(e.accepted + e.rejected, 1 << (psi.len() - 1));
    assert!(e.rejected >= e.accepted);
    assert!(e.accepted > 0 && !e.inconclusive);
    let achiever = e.achiever.unwrap();
    assert_eq!(achiever[0].signum(), achiever[1].signum());
}

#[test]
fn independent_draws_of_repeated_node_change_rank() {
    let p = repeated_cv();
    let model = p.model();
    let psi = p.psi();
    let mut g = ChaCha8Rng::seed_from_u64(3);
    let spec = PerturbSpec {
        mode: Mode::MonteCarlo,
        ..tiny()
    };
    let mut rank_changes = 0;
    for _ in 0..20 {
        match sample_perturbation(&model, &psi, &spec, None, &mut g).unwrap() {
            Sample::Rejected { delta, reason } => {
                assert_ne!(delta[0], delta[1]);
                if let Rejection::RankChange { base, perturbed } = reason {
                    assert_eq!((base, perturbed), (3, 4));
                    rank_changes += 1;
                }
            }
            Sample::Accepted(delta) => assert_eq!(delta[0], delta[1]),
        }
    }
    assert!(rank_changes > 0);
}

// For M = I the data part and the right-hand side part each contribute |x|.
#[test]
fn identity_least_squares_is_two() {
    let m = Matrix::identity(3);
    let (model, psi) = entrywise_model(&m);
    let b = normal(&mut rng(1), 3);
    let spec = PerturbSpec {
        mode: Mode::Extrapolated,
        ..PerturbSpec::default()
    };
    let e = estimate_ls_cn(&model, &psi, &b, &spec, None).unwrap();
    assert!((e.mixed_lb - 2.0).abs() <= 1e-9);
    assert!((e.componentwise_lb - 2.0).abs() <= 1e-9);
}

#[test]
fn zero_rhs_is_degenerate() {
    let (model, psi) = entrywise_model(&Matrix::identity(2));
    let err = estimate_ls_cn(&model, &psi, &[0.0, 0.0], &PerturbSpec::default(), None);
    assert!(matches!(err, Err(Error::Degenerate(_))));
}

#[test]
fn bad_specs_are_rejected() {
    let (model, psi) = entrywise_model(&Matrix::identity(2));
    for spec in [
        PerturbSpec { epsilon: -1.0, ..PerturbSpec::default() },
        PerturbSpec { epsilon: f64::NAN, ..PerturbSpec::default() },
        PerturbSpec { mode: Mode::Extrapolated, eps_ladder: vec![1e-4], ..PerturbSpec::default() },
        PerturbSpec { mode: Mode::Extrapolated, eps_ladder: vec![1e-5, 1e-4], ..PerturbSpec::default() },
    ] {
        assert!(matches!(
            estimate_pinv_cn(&model, &psi, &spec, None),
            Err(Error::InvalidArgument(_))
        ));
    }
}



/// A fixed matrix with one inert parameter, so only `b` moves.
struct Fixed(Matrix);

impl MatrixModel for Fixed {
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }
    fn param_count(&self) -> usize {
        1
    }
    fn labels(&self) -> Vec<String> {
        vec!["t".into()]
    }
    fn check_domain(&self, _: &[f64]) -> Result<()> {
        Ok(())
    }
    fn eval(&self, _: &[f64]) -> Result<Matrix> {
        Ok(self.0.clone())
    }
    fn derivatives(&self, _: &[f64]) -> Result<Vec<Derivative>> {
        let (r, c) = self.0.shape();
        Ok(vec![Derivative::dense(Matrix::zeros(r, c))])
    }
}

#[test]
fn rhs_only_perturbation() {
    let m = Matrix::from_row_major(3, 3, vec![2.0, 1.0, 0.0, -1.0, 3.0, 1.0, 0.5, 0.0, 4.0]).unwrap();
    let b = vec![1.0, -2.0, 0.5];
    let inv = pinvcond_core::pinv(&m, None).unwrap().pinv;
    let x = inv.matvec(&b);
    let babs: Vec<f64> = b.iter().map(|v| v.abs()).collect();
    let y = inv.abs().matvec(&babs);
    let norm = |v: &[f64]| v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let expect = norm(&y) / norm(&x);
    let e = estimate_ls_cn(&Fixed(m), &[1.0], &b, &PerturbSpec::default(), None).unwrap();
    assert!((e.mixed_lb - expect).abs() <= 1e-12 * expect);
}

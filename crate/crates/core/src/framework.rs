//! Generic condition-number engine for any [`MatrixModel`].
//!
//! Pseudoinverse kernels are `n × m` matrices, least-squares kernels are
//! `n`-vectors. Each derivative contributes
//! `|M†GM†| + |M†M†ᵀGᵀE| + |FGᵀM†ᵀM†|` (or the least-squares analogue)
//! weighted by `|ψ_k|`, where `G` is the derivative.

use alloc::vec::Vec;

use crate::accum::{abs_matvec, abs_product, MatAcc, VecAcc};
use crate::error::{Error, Result};
use crate::linalg::{dagger, dot, pinv, pseudo_divide, vec_max_norm, Matrix, PinvBundle};
use crate::model::{check_len, CnMode, CnReport, DerivShape, Derivative, Kernel, MatrixModel};

/// Products of `M†` shared by every pseudoinverse kernel.
pub(crate) struct PinvCtx<'a> {
    pub(crate) bundle: &'a PinvBundle,
    /// `M†M†ᵀ` (n×n)
    pub(crate) ppt: Matrix,
    /// `M†ᵀM†` (m×m)
    pub(crate) ptp: Matrix,
}

impl<'a> PinvCtx<'a> {
    pub(crate) fn new(bundle: &'a PinvBundle) -> Self {
        let p = &bundle.pinv;
        let pt = p.transpose();
        Self {
            bundle,
            ppt: p.mul(&pt),
            ptp: pt.mul(p),
        }
    }

    #[inline]
    pub(crate) fn p(&self) -> &Matrix {
        &self.bundle.pinv
    }

    #[inline]
    pub(crate) fn e(&self) -> &Matrix {
        &self.bundle.proj_e
    }

    #[inline]
    pub(crate) fn f(&self) -> &Matrix {
        &self.bundle.proj_f
    }

    pub(crate) fn m(&self) -> usize {
        self.bundle.m.rows()
    }

    pub(crate) fn n(&self) -> usize {
        self.bundle.m.cols()
    }

    pub(crate) fn new_acc(&self) -> MatAcc {
        MatAcc::new(self.n(), self.m())
    }

    /// The six vectors of a rank-one term `u vᵀ`.
    fn rank_one_parts(&self, u: &[f64], v: &[f64]) -> [Vec<f64>; 6] {
        [
            self.p().matvec(u),
            self.p().vecmat(v),
            self.ppt.matvec(v),
            self.e().vecmat(u),
            self.f().matvec(v),
            self.ptp.vecmat(u),
        ]
    }

    /// The three signed matrices `M†GM†`, `M†M†ᵀGᵀE`, `FGᵀM†ᵀM†` for a
    /// block derivative.
    fn block_parts(&self, row0: usize, col0: usize, block: &Matrix) -> [Matrix; 3] {
        let (n, m) = (self.n(), self.m());
        let (br, bc) = block.shape();
        let bt = block.transpose();
        let p = self.p();
        let t1 = p
            .submatrix(0, n, row0, row0 + br)
            .mul(&block.mul(&p.submatrix(col0, col0 + bc, 0, m)));
        let t2 = self
            .ppt
            .submatrix(0, n, col0, col0 + bc)
            .mul(&bt.mul(&self.e().submatrix(row0, row0 + br, 0, m)));
        let t3 = self
            .f()
            .submatrix(0, n, col0, col0 + bc)
            .mul(&bt.mul(&self.ptp.submatrix(row0, row0 + br, 0, m)));
        [t1, t2, t3]
    }

    pub(crate) fn add_upper(&self, acc: &mut MatAcc, d: &Derivative, w: f64) {
        if w == 0.0 {
            return;
        }
        match &d.shape {
            DerivShape::RankOne { u, v } => {
                let [w1, w2, w3, w4, w5, w6] = self.rank_one_parts(u, v);
                acc.add_outer(&w1, &w2, w);
                acc.add_outer(&w3, &w4, w);
                acc.add_outer(&w5, &w6, w);
            }
            DerivShape::Dense(g) => self.add_upper_block(acc, 0, 0, g, w),
            DerivShape::Block { row0, col0, block } => {
                self.add_upper_block(acc, *row0, *col0, block, w)
            }
        }
    }

    fn add_upper_block(&self, acc: &mut MatAcc, row0: usize, col0: usize, block: &Matrix, w: f64) {
        for t in self.block_parts(row0, col0, block) {
            acc.add_abs(&t, w);
        }
    }

    pub(crate) fn add_exact(&self, acc: &mut MatAcc, d: &Derivative, w: f64) {
        if w == 0.0 {
            return;
        }
        match &d.shape {
            DerivShape::RankOne { u, v } => {
                let w1 = self.p().matvec(u);
                let w2 = self.p().vecmat(v);
                let w3 = self.ppt.matvec(v);
                let w4 = self.e().vecmat(u);
                acc.add_abs_diff_outer(&w1, &w2, &w3, &w4, w);
            }
            DerivShape::Dense(g) => self.add_exact_block(acc, 0, 0, g, w),
            DerivShape::Block { row0, col0, block } => {
                self.add_exact_block(acc, *row0, *col0, block, w)
            }
        }
    }

    fn add_exact_block(&self, acc: &mut MatAcc, row0: usize, col0: usize, block: &Matrix, w: f64) {
        let [t1, t2, _] = self.block_parts(row0, col0, block);
        acc.add_abs_diff(&t1, &t2, w);
    }

    pub(crate) fn add_range(&self, acc: &mut MatAcc, d: &Derivative, w: f64) {
        if w == 0.0 {
            return;
        }
        match &d.shape {
            DerivShape::RankOne { u, v } => {
                acc.add_outer(&self.p().matvec(u), &self.p().vecmat(v), w);
            }
            DerivShape::Dense(g) => {
                let [t1, _, _] = self.block_parts(0, 0, g);
                acc.add_abs(&t1, w);
            }
            DerivShape::Block { row0, col0, block } => {
                let [t1, _, _] = self.block_parts(*row0, *col0, block);
                acc.add_abs(&t1, w);
            }
        }
    }

    /// Report from a pseudoinverse kernel.
    pub(crate) fn report(&self, kernel: Matrix, mode: CnMode) -> Result<CnReport> {
        pinv_report(self.bundle, kernel, mode)
    }
}

pub(crate) fn pinv_report(bundle: &PinvBundle, kernel: Matrix, mode: CnMode) -> Result<CnReport> {
    let denom = bundle.pinv.max_norm();
    if denom == 0.0 {
        return Err(Error::Degenerate("M is zero, so M† vanishes"));
    }
    let mixed = kernel.max_norm() / denom;
    let componentwise = pseudo_divide(&kernel, &bundle.pinv)?.max_norm();
    Ok(CnReport {
        mixed,
        componentwise,
        kernel: Kernel::Matrix(kernel),
        rank: bundle.rank,
        mode,
        tol_used: bundle.tol_used,
    })
}

/// A solved minimum-norm least-squares problem.
#[derive(Clone, Debug)]
pub struct LsProblem {
    pub bundle: PinvBundle,
    pub b: Vec<f64>,
    /// `M†b`
    pub x: Vec<f64>,
    /// `b − Mx`
    pub residual: Vec<f64>,
}

impl LsProblem {
    pub fn new(m: &Matrix, b: &[f64], rank_tol: Option<f64>) -> Result<Self> {
        check_len("right-hand side", m.rows(), b.len())?;
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let bundle = pinv(m, rank_tol)?;
        let x = bundle.pinv.matvec(b);
        let mx = m.matvec(&x);
        let residual = b.iter().zip(&mx).map(|(bi, yi)| bi - yi).collect();
        Ok(Self {
            bundle,
            b: b.to_vec(),
            x,
            residual,
        })
    }
}

/// Products shared by every least-squares kernel.
pub(crate) struct LsCtx<'a> {
    pub(crate) pc: PinvCtx<'a>,
    pub(crate) prob: &'a LsProblem,
    /// `M†ᵀx` (m)
    pub(crate) y: Vec<f64>,
}

impl<'a> LsCtx<'a> {
    pub(crate) fn new(prob: &'a LsProblem) -> Self {
        let pc = PinvCtx::new(&prob.bundle);
        let y = prob.bundle.pinv.vecmat(&prob.x);
        Self { pc, prob, y }
    }

    pub(crate) fn x(&self) -> &[f64] {
        &self.prob.x
    }

    pub(crate) fn r(&self) -> &[f64] {
        &self.prob.residual
    }

    pub(crate) fn new_acc(&self) -> VecAcc {
        VecAcc::new(self.pc.n())
    }

    fn block_parts(&self, row0: usize, col0: usize, block: &Matrix) -> [Vec<f64>; 3] {
        let (n, m) = (self.pc.n(), self.pc.m());
        let (br, bc) = block.shape();
        let p = self.pc.p();
        let bt = block.transpose();
        let t1 = p
            .submatrix(0, n, row0, row0 + br)
            .matvec(&block.matvec(&self.x()[col0..col0 + bc]));
        let t2 = self
            .pc
            .ppt
            .submatrix(0, n, col0, col0 + bc)
            .matvec(&bt.matvec(&self.r()[row0..row0 + br]));
        let t3 = self
            .pc
            .f()
            .submatrix(0, n, col0, col0 + bc)
            .matvec(&bt.matvec(&self.y[row0..row0 + br]));
        debug_assert!(row0 + br <= m);
        [t1, t2, t3]
    }

    pub(crate) fn add_upper(&self, acc: &mut VecAcc, d: &Derivative, w: f64) {
        if w == 0.0 {
            return;
        }
        match &d.shape {
            DerivShape::RankOne { u, v } => {
                acc.add_scaled(&self.pc.p().matvec(u), w * dot(v, self.x()).abs());
                acc.add_scaled(&self.pc.ppt.matvec(v), w * dot(u, self.r()).abs());
                acc.add_scaled(&self.pc.f().matvec(v), w * dot(u, &self.y).abs());
            }
            DerivShape::Dense(g) => {
                for t in self.block_parts(0, 0, g) {
                    acc.add_scaled(&t, w);
                }
            }
            DerivShape::Block { row0, col0, block } => {
                for t in self.block_parts(*row0, *col0, block) {
                    acc.add_scaled(&t, w);
                }
            }
        }
    }

    pub(crate) fn add_exact(&self, acc: &mut VecAcc, d: &Derivative, w: f64) {
        if w == 0.0 {
            return;
        }
        match &d.shape {
            DerivShape::RankOne { u, v } => {
                let w1 = self.pc.p().matvec(u);
                let w3 = self.pc.ppt.matvec(v);
                acc.add_abs_diff(&w1, dot(v, self.x()), &w3, dot(u, self.r()), w);
            }
            DerivShape::Dense(g) => {
                let [t1, t2, _] = self.block_parts(0, 0, g);
                acc.add_abs_diff(&t1, 1.0, &t2, 1.0, w);
            }
            DerivShape::Block { row0, col0, block } => {
                let [t1, t2, _] = self.block_parts(*row0, *col0, block);
                acc.add_abs_diff(&t1, 1.0, &t2, 1.0, w);
            }
        }
    }

    /// `+= |M†||b|`
    pub(crate) fn add_rhs_term(&self, acc: &mut VecAcc) {
        acc.add_abs_matvec(self.pc.p(), &self.prob.b);
    }

    pub(crate) fn report(&self, kernel: Vec<f64>, mode: CnMode) -> Result<CnReport> {
        ls_report(self.prob, kernel, mode)
    }
}

pub(crate) fn ls_report(prob: &LsProblem, kernel: Vec<f64>, mode: CnMode) -> Result<CnReport> {
    let denom = vec_max_norm(&prob.x);
    if denom == 0.0 {
        return Err(Error::Degenerate("x = M†b is zero"));
    }
    let mixed = vec_max_norm(&kernel) / denom;
    let componentwise = kernel
        .iter()
        .zip(&prob.x)
        .fold(0.0, |acc: f64, (k, xi)| acc.max((k * dagger(*xi)).abs()));
    Ok(CnReport {
        mixed,
        componentwise,
        kernel: Kernel::Vector(kernel),
        rank: prob.bundle.rank,
        mode,
        tol_used: prob.bundle.tol_used,
    })
}

fn check_derivatives(derivs: &[Derivative], psi: &[f64], shape: (usize, usize)) -> Result<()> {
    check_len("derivative list", psi.len(), derivs.len())?;
    for d in derivs {
        let ok = match &d.shape {
            DerivShape::Dense(g) => g.shape() == shape,
            DerivShape::RankOne { u, v } => u.len() == shape.0 && v.len() == shape.1,
            DerivShape::Block { row0, col0, block } => {
                row0 + block.rows() <= shape.0 && col0 + block.cols() <= shape.1
            }
        };
        if !ok {
            return Err(Error::InvalidArgument("derivative descriptor does not fit the matrix"));
        }
    }
    Ok(())
}

fn require_full_column_rank(bundle: &PinvBundle) -> Result<()> {
    let cols = bundle.m.cols();
    if bundle.rank != cols {
        return Err(Error::NotFullColumnRank {
            rank: bundle.rank,
            cols,
        });
    }
    Ok(())
}

fn prepare<M: MatrixModel + ?Sized>(
    model: &M,
    psi: &[f64],
) -> Result<(Matrix, Vec<Derivative>)> {
    model.check_domain(psi)?;
    let m = model.eval(psi)?;
    let derivs = model.derivatives(psi)?;
    check_derivatives(&derivs, psi, m.shape())?;
    Ok((m, derivs))
}

/// Upper bounds on the mixed and componentwise condition numbers of `M†`.
pub fn pinv_cn_upper<M: MatrixModel + ?Sized>(
    model: &M,
    psi: &[f64],
    rank_tol: Option<f64>,
) -> Result<CnReport> {
    let (m, derivs) = prepare(model, psi)?;
    pinv_cn_upper_with(&pinv(&m, rank_tol)?, &derivs, psi)
}

/// [`pinv_cn_upper`] on a precomputed pseudoinverse and derivative list.
pub fn pinv_cn_upper_with(
    bundle: &PinvBundle,
    derivs: &[Derivative],
    psi: &[f64],
) -> Result<CnReport> {
    check_derivatives(derivs, psi, bundle.m.shape())?;
    let ctx = PinvCtx::new(bundle);
    let mut acc = ctx.new_acc();
    for (d, p) in derivs.iter().zip(psi) {
        ctx.add_upper(&mut acc, d, d.weight(*p));
    }
    ctx.report(acc.finish(), CnMode::UpperBound)
}

/// Exact condition numbers of `M†` for full column rank `M`.
pub fn pinv_cn_exact_fullrank<M: MatrixModel + ?Sized>(
    model: &M,
    psi: &[f64],
    rank_tol: Option<f64>,
) -> Result<CnReport> {
    let (m, derivs) = prepare(model, psi)?;
    pinv_cn_exact_fullrank_with(&pinv(&m, rank_tol)?, &derivs, psi)
}

pub fn pinv_cn_exact_fullrank_with(
    bundle: &PinvBundle,
    derivs: &[Derivative],
    psi: &[f64],
) -> Result<CnReport> {
    check_derivatives(derivs, psi, bundle.m.shape())?;
    require_full_column_rank(bundle)?;
    let ctx = PinvCtx::new(bundle);
    let mut acc = ctx.new_acc();
    for (d, p) in derivs.iter().zip(psi) {
        ctx.add_exact(&mut acc, d, d.weight(*p));
    }
    ctx.report(acc.finish(), CnMode::ExactFullRank)
}

/// Bound using only the `|M†GM†|` part of each term.
pub fn pinv_cn_range_restricted<M: MatrixModel + ?Sized>(
    model: &M,
    psi: &[f64],
    rank_tol: Option<f64>,
) -> Result<CnReport> {
    let (m, derivs) = prepare(model, psi)?;
    let bundle = pinv(&m, rank_tol)?;
    let ctx = PinvCtx::new(&bundle);
    let mut acc = ctx.new_acc();
    for (d, p) in derivs.iter().zip(psi) {
        ctx.add_range(&mut acc, d, d.weight(*p));
    }
    ctx.report(acc.finish(), CnMode::RangeRestricted)
}

/// Condition numbers of `M†` under arbitrary entrywise perturbations.
pub fn pinv_cn_unstructured(m: &Matrix, rank_tol: Option<f64>) -> Result<CnReport> {
    pinv_cn_unstructured_with(&pinv(m, rank_tol)?)
}

pub fn pinv_cn_unstructured_with(bundle: &PinvBundle) -> Result<CnReport> {
    let ctx = PinvCtx::new(bundle);
    let m = &bundle.m;
    let mt = m.transpose();
    let mut acc = ctx.new_acc();
    acc.add_abs_product(&abs_product(ctx.p(), m), ctx.p());
    acc.add_abs_product(&abs_product(&ctx.ppt, &mt), ctx.e());
    acc.add_abs_product(&abs_product(ctx.f(), &mt), &ctx.ptp);
    ctx.report(acc.finish(), CnMode::Unstructured)
}

/// Upper bounds on the condition numbers of `x = M†b`.
pub fn ls_cn_upper<M: MatrixModel + ?Sized>(
    model: &M,
    psi: &[f64],
    b: &[f64],
    rank_tol: Option<f64>,
) -> Result<CnReport> {
    let (m, derivs) = prepare(model, psi)?;
    ls_cn_upper_with(&LsProblem::new(&m, b, rank_tol)?, &derivs, psi)
}

pub fn ls_cn_upper_with(prob: &LsProblem, derivs: &[Derivative], psi: &[f64]) -> Result<CnReport> {
    check_derivatives(derivs, psi, prob.bundle.m.shape())?;
    let ctx = LsCtx::new(prob);
    let mut acc = ctx.new_acc();
    for (d, p) in derivs.iter().zip(psi) {
        ctx.add_upper(&mut acc, d, d.weight(*p));
    }
    ctx.add_rhs_term(&mut acc);
    ctx.report(acc.finish(), CnMode::UpperBound)
}

/// Exact condition numbers of `x = M†b` for full column rank `M`.
pub fn ls_cn_exact_fullrank<M: MatrixModel + ?Sized>(
    model: &M,
    psi: &[f64],
    b: &[f64],
    rank_tol: Option<f64>,
) -> Result<CnReport> {
    let (m, derivs) = prepare(model, psi)?;
    ls_cn_exact_fullrank_with(&LsProblem::new(&m, b, rank_tol)?, &derivs, psi)
}

pub fn ls_cn_exact_fullrank_with(
    prob: &LsProblem,
    derivs: &[Derivative],
    psi: &[f64],
) -> Result<CnReport> {
    check_derivatives(derivs, psi, prob.bundle.m.shape())?;
    require_full_column_rank(&prob.bundle)?;
    let ctx = LsCtx::new(prob);
    let mut acc = ctx.new_acc();
    for (d, p) in derivs.iter().zip(psi) {
        ctx.add_exact(&mut acc, d, d.weight(*p));
    }
    ctx.add_rhs_term(&mut acc);
    ctx.report(acc.finish(), CnMode::ExactFullRank)
}

/// Least-squares condition numbers under arbitrary entrywise perturbations
/// of `M` and `b`.
pub fn ls_cn_unstructured(m: &Matrix, b: &[f64], rank_tol: Option<f64>) -> Result<CnReport> {
    ls_cn_unstructured_with(&LsProblem::new(m, b, rank_tol)?)
}

pub fn ls_cn_unstructured_with(prob: &LsProblem) -> Result<CnReport> {
    let ctx = LsCtx::new(prob);
    let m = &prob.bundle.m;
    let mt = m.transpose();
    let mut acc = ctx.new_acc();
    acc.add_abs_matvec(ctx.pc.p(), &abs_matvec(m, ctx.x()));
    acc.add_abs_matvec(&ctx.pc.ppt, &abs_matvec(&mt, ctx.r()));
    acc.add_abs_matvec(ctx.pc.f(), &abs_matvec(&mt, &ctx.y));
    ctx.add_rhs_term(&mut acc);
    ctx.report(acc.finish(), CnMode::Unstructured)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::entrywise_model;
    use alloc::vec;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn identity_entrywise_is_one() {
        let (model, psi) = entrywise_model(&Matrix::identity(3));
        let r = pinv_cn_upper(&model, &psi, None).unwrap();
        assert_eq!(r.mixed, 1.0);
        assert_eq!(r.componentwise, 1.0);
    }

    #[test]
    fn diag_unstructured() {
        let r = pinv_cn_unstructured(&Matrix::diag(&[1.0, 2.0]), None).unwrap();
        assert!(rel(r.mixed, 1.0) < 1e-15);
        assert!(rel(r.componentwise, 1.0) < 1e-15);
        match r.kernel {
            Kernel::Matrix(k) => {
                assert!(rel(k[(1, 1)], 0.5) < 1e-15);
                assert_eq!(k[(0, 1)], 0.0);
            }
            Kernel::Vector(_) => panic!("pinv kernel must be a matrix"),
        }
    }

    #[test]
    fn identity_ls_unstructured_is_two() {
        let r = ls_cn_unstructured(&Matrix::identity(3), &[1.0, 0.0, 0.0], None).unwrap();
        assert!(rel(r.mixed, 2.0) < 1e-15);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let err = pinv_cn_unstructured(&Matrix::zeros(2, 2), None).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
        let err = ls_cn_unstructured(&Matrix::identity(2), &[0.0, 0.0], None).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn exact_needs_full_column_rank() {
        let m = Matrix::from_row_major(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let (model, psi) = entrywise_model(&m);
        let err = pinv_cn_exact_fullrank(&model, &psi, None).unwrap_err();
        assert_eq!(err, Error::NotFullColumnRank { rank: 1, cols: 2 });
    }

    #[test]
    fn rank_one_model_range_restricted() {
        // M = ψ·[1;1][1 1], ψ = 2: kernel |M†||M||M†| has max equal to ‖M†‖max.
        struct R1;
        impl MatrixModel for R1 {
            fn shape(&self) -> (usize, usize) {
                (2, 2)
            }
            fn param_count(&self) -> usize {
                1
            }
            fn labels(&self) -> Vec<alloc::string::String> {
                vec!["psi".into()]
            }
            fn check_domain(&self, _: &[f64]) -> Result<()> {
                Ok(())
            }
            fn eval(&self, psi: &[f64]) -> Result<Matrix> {
                Ok(Matrix::from_fn(2, 2, |_, _| psi[0]))
            }
            fn derivatives(&self, _: &[f64]) -> Result<Vec<Derivative>> {
                Ok(vec![Derivative::rank_one(vec![1.0, 1.0], vec![1.0, 1.0])])
            }
        }
        let r = pinv_cn_range_restricted(&R1, &[2.0], None).unwrap();
        assert!(rel(r.mixed, 1.0) < 1e-14);
        assert_eq!(r.mode, CnMode::RangeRestricted);
    }

    #[test]
    fn dense_and_rank_one_descriptors_agree() {
        let m = Matrix::from_fn(3, 2, |i, j| 1.0 + i as f64 * 0.5 - j as f64 * 1.25 + (i * j) as f64);
        let bundle = pinv(&m, None).unwrap();
        let u = vec![0.3, -1.0, 2.0];
        let v = vec![1.5, -0.25];
        let r1 = vec![Derivative::rank_one(u.clone(), v.clone())];
        let dn = vec![Derivative::dense(Matrix::from_fn(3, 2, |i, j| u[i] * v[j]))];
        let a = pinv_cn_upper_with(&bundle, &r1, &[0.7]).unwrap();
        let b = pinv_cn_upper_with(&bundle, &dn, &[0.7]).unwrap();
        assert!(rel(a.mixed, b.mixed) < 1e-13);
        assert!(rel(a.componentwise, b.componentwise) < 1e-13);
    }
}

//! Cauchy-Vandermonde matrices: `l` Cauchy columns `1/(c_i − d_j)`
//! followed by `n − l` Vandermonde columns `c_i^k`, `k = 0..n−l−1`.
//!
//! Parameters are ordered `[c_1..c_m, d_1..d_l]` everywhere.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::framework::{LsCtx, LsProblem, PinvCtx};
use crate::linalg::{hadamard, pinv, Matrix, PinvBundle};
use crate::model::{check_finite, unit, CnMode, CnReport, Derivative, MatrixModel};

/// Relative node gap below which [`CvParams::near_collisions`] reports.
pub const PROXIMITY_WARN: f64 = 1e-12;

/// Nodes of an `m × n` Cauchy-Vandermonde matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CvParams {
    c: Vec<f64>,
    d: Vec<f64>,
    n: usize,
}

/// Every pair `(i, j)` with `c[i] == d[j]`.
pub fn collisions(c: &[f64], d: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, ci) in c.iter().enumerate() {
        for (j, dj) in d.iter().enumerate() {
            if ci == dj {
                out.push((i, j));
            }
        }
    }
    out
}

impl CvParams {
    pub fn new(c: Vec<f64>, d: Vec<f64>, n: usize) -> Result<Self> {
        if c.is_empty() || n == 0 {
            return Err(Error::Empty);
        }
        if d.len() > n {
            return Err(Error::InvalidArgument("more Cauchy columns than columns"));
        }
        check_finite("c", &c)?;
        check_finite("d", &d)?;
        if let Some(&(i, j)) = collisions(&c, &d).first() {
            return Err(Error::NodeCollision {
                c_index: i,
                d_index: j,
            });
        }
        Ok(Self { c, d, n })
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Row count.
    pub fn m(&self) -> usize {
        self.c.len()
    }

    /// Column count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of Cauchy columns.
    pub fn l(&self) -> usize {
        self.d.len()
    }

    /// `[c, d]`
    pub fn psi(&self) -> Vec<f64> {
        let mut v = self.c.clone();
        v.extend_from_slice(&self.d);
        v
    }

    pub fn model(&self) -> CvModel {
        CvModel {
            m: self.m(),
            l: self.l(),
            n: self.n,
        }
    }

    /// Node pairs whose relative gap `|c_i − d_j| / max(|c_i|, |d_j|)` is
    /// below [`PROXIMITY_WARN`], with the gap.
    pub fn near_collisions(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, ci) in self.c.iter().enumerate() {
            for (j, dj) in self.d.iter().enumerate() {
                let scale = ci.abs().max(dj.abs());
                let gap = if scale == 0.0 {
                    0.0
                } else {
                    (ci - dj).abs() / scale
                };
                if gap < PROXIMITY_WARN {
                    out.push((i, j, gap));
                }
            }
        }
        out
    }

    fn needs_nonzero_c(&self) -> bool {
        self.n >= self.l() + 2
    }

    fn check_derivative_domain(&self) -> Result<()> {
        if self.needs_nonzero_c() {
            if let Some(i) = self.c.iter().position(|v| *v == 0.0) {
                return Err(Error::ZeroNode { index: i });
            }
        }
        Ok(())
    }
}

/// The matrix built from the nodes.
pub fn build_cv(p: &CvParams) -> Matrix {
    let (m, n, l) = (p.m(), p.n, p.l());
    let mut out = Matrix::zeros(m, n);
    for i in 0..m {
        let ci = p.c[i];
        for j in 0..l {
            out[(i, j)] = 1.0 / (ci - p.d[j]);
        }
        let mut pow = 1.0;
        for j in l..n {
            out[(i, j)] = pow;
            pow *= ci;
        }
    }
    out
}

/// Auxiliary matrices of the derivative formulas.
#[derive(Clone, Debug, PartialEq)]
pub struct CvAux {
    /// `[−M(:,1:l) | 0 | M(:,l+2:n)]`
    pub m1: Matrix,
    /// `[M(:,1:l) | 0]`
    pub m2: Matrix,
    /// Row `i` is `[1/(c_i − d_j)…, 1, 1/c_i, 2/c_i, …, (n−l−1)/c_i]`.
    pub q: Matrix,
    /// `[d_1, …, d_l, 0, …, 0]`
    pub d_ext: Vec<f64>,
}

pub fn cv_aux(p: &CvParams) -> Result<CvAux> {
    p.check_derivative_domain()?;
    let mm = build_cv(p);
    let (m, n, l) = (p.m(), p.n, p.l());
    let m1 = Matrix::from_fn(m, n, |i, j| {
        if j < l {
            -mm[(i, j)]
        } else if j == l {
            0.0
        } else {
            mm[(i, j)]
        }
    });
    let m2 = Matrix::from_fn(m, n, |i, j| if j < l { mm[(i, j)] } else { 0.0 });
    let q = Matrix::from_fn(m, n, |i, j| {
        if j < l {
            1.0 / (p.c[i] - p.d[j])
        } else if j == l {
            1.0
        } else {
            (j - l) as f64 / p.c[i]
        }
    });
    let mut d_ext = p.d.clone();
    d_ext.resize(n, 0.0);
    Ok(CvAux { m1, m2, q, d_ext })
}

/// `∂M/∂c_i = e_i (M₁⊙Q)(i,:)` and `∂M/∂d_j = (M₂⊙M₂)(:,j) e_jᵀ`.
pub fn cv_derivatives(p: &CvParams) -> Result<Vec<Derivative>> {
    let aux = cv_aux(p)?;
    let r = hadamard(&aux.m1, &aux.q)?;
    let s = hadamard(&aux.m2, &aux.m2)?;
    let (m, n) = (p.m(), p.n);
    let mut out = Vec::with_capacity(m + p.l());
    for i in 0..m {
        out.push(Derivative::rank_one(unit(m, i), r.row(i).to_vec()));
    }
    for j in 0..p.l() {
        out.push(Derivative::rank_one(s.column(j), unit(n, j)));
    }
    Ok(out)
}

/// [`MatrixModel`] over `[c, d]` for fixed `m`, `l` and `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CvModel {
    pub m: usize,
    pub l: usize,
    pub n: usize,
}

impl CvModel {
    pub fn params(&self, psi: &[f64]) -> Result<CvParams> {
        if psi.len() != self.m + self.l {
            return Err(Error::LengthMismatch {
                what: "CV parameters",
                expected: self.m + self.l,
                got: psi.len(),
            });
        }
        CvParams::new(psi[..self.m].to_vec(), psi[self.m..].to_vec(), self.n)
    }
}

impl MatrixModel for CvModel {
    fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn param_count(&self) -> usize {
        self.m + self.l
    }

    fn labels(&self) -> Vec<String> {
        (0..self.m)
            .map(|i| format!("c{}", i + 1))
            .chain((0..self.l).map(|j| format!("d{}", j + 1)))
            .collect()
    }

    fn check_domain(&self, psi: &[f64]) -> Result<()> {
        self.params(psi).map(|_| ())
    }

    fn eval(&self, psi: &[f64]) -> Result<Matrix> {
        Ok(build_cv(&self.params(psi)?))
    }

    fn derivatives(&self, psi: &[f64]) -> Result<Vec<Derivative>> {
        cv_derivatives(&self.params(psi)?)
    }
}

/// Products of the auxiliary matrices with `M†` shared by the closed forms.
struct CvTerms {
    /// `M₁⊙Q`
    r: Matrix,
    /// `M₂⊙M₂`
    s: Matrix,
    /// `(M₁⊙Q)M†`
    rp: Matrix,
    /// `M†M†ᵀ(M₁⊙Q)ᵀ`
    ppt_rt: Matrix,
    /// `F(M₁⊙Q)ᵀ`
    f_rt: Matrix,
    /// `M†(M₂⊙M₂)`
    ps: Matrix,
    /// `(M₂⊙M₂)ᵀE`
    st_e: Matrix,
    /// `(M₂⊙M₂)ᵀM†ᵀM†`
    st_ptp: Matrix,
}

impl CvTerms {
    fn new(p: &CvParams, ctx: &PinvCtx<'_>) -> Result<Self> {
        let aux = cv_aux(p)?;
        let r = hadamard(&aux.m1, &aux.q)?;
        let s = hadamard(&aux.m2, &aux.m2)?;
        let rt = r.transpose();
        let st = s.transpose();
        Ok(Self {
            rp: r.mul(ctx.p()),
            ppt_rt: ctx.ppt.mul(&rt),
            f_rt: ctx.f().mul(&rt),
            ps: ctx.p().mul(&s),
            st_e: st.mul(ctx.e()),
            st_ptp: st.mul(&ctx.ptp),
            r,
            s,
        })
    }
}

fn build_checked(p: &CvParams, rank_tol: Option<f64>) -> Result<PinvBundle> {
    p.check_derivative_domain()?;
    pinv(&build_cv(p), rank_tol)
}

/// Closed-form upper bounds for `M†`.
pub fn cv_pinv_cn_upper(p: &CvParams, rank_tol: Option<f64>) -> Result<CnReport> {
    let bundle = build_checked(p, rank_tol)?;
    let ctx = PinvCtx::new(&bundle);
    let t = CvTerms::new(p, &ctx)?;
    let mut acc = ctx.new_acc();
    let pm = ctx.p();
    let wc: Vec<f64> = p.c.iter().map(|v| v.abs()).collect();
    let wd: Vec<f64> = p.d.iter().map(|v| v.abs()).collect();
    // |M†||Θc||(M₁⊙Q)M†|
    for (i, w) in wc.iter().enumerate() {
        acc.add_outer(&pm.column(i), t.rp.row(i), *w);
    }
    // |M†M†ᵀ(M₁⊙Q)ᵀ||Θc||E|
    for (i, w) in wc.iter().enumerate() {
        acc.add_outer(&t.ppt_rt.column(i), ctx.e().row(i), *w);
    }
    // |F(M₁⊙Q)ᵀ||Θc||M†ᵀM†|
    for (i, w) in wc.iter().enumerate() {
        acc.add_outer(&t.f_rt.column(i), ctx.ptp.row(i), *w);
    }
    // |M†(M₂⊙M₂)||Θd'||M†|
    for (j, w) in wd.iter().enumerate() {
        acc.add_outer(&t.ps.column(j), pm.row(j), *w);
    }
    // |M†M†ᵀ||Θd'||(M₂⊙M₂)ᵀE|
    for (j, w) in wd.iter().enumerate() {
        acc.add_outer(&ctx.ppt.column(j), t.st_e.row(j), *w);
    }
    // |F||Θd'||(M₂⊙M₂)ᵀM†ᵀM†|
    for (j, w) in wd.iter().enumerate() {
        acc.add_outer(&ctx.f().column(j), t.st_ptp.row(j), *w);
    }
    ctx.report(acc.finish(), CnMode::UpperBound)
}

/// Closed-form exact values for `M†` when `M` has full column rank.
pub fn cv_pinv_cn_exact_fullrank(p: &CvParams, rank_tol: Option<f64>) -> Result<CnReport> {
    let bundle = build_checked(p, rank_tol)?;
    if bundle.rank != p.n {
        return Err(Error::NotFullColumnRank {
            rank: bundle.rank,
            cols: p.n,
        });
    }
    let ctx = PinvCtx::new(&bundle);
    let t = CvTerms::new(p, &ctx)?;
    let mut acc = ctx.new_acc();
    let pm = ctx.p();
    for (i, ci) in p.c.iter().enumerate() {
        acc.add_abs_diff_outer(
            &pm.column(i),
            t.rp.row(i),
            &t.ppt_rt.column(i),
            ctx.e().row(i),
            ci.abs(),
        );
    }
    for (j, dj) in p.d.iter().enumerate() {
        acc.add_abs_diff_outer(
            &t.ps.column(j),
            pm.row(j),
            &ctx.ppt.column(j),
            t.st_e.row(j),
            dj.abs(),
        );
    }
    ctx.report(acc.finish(), CnMode::ExactFullRank)
}

fn ls_setup(p: &CvParams, b: &[f64], rank_tol: Option<f64>) -> Result<LsProblem> {
    p.check_derivative_domain()?;
    LsProblem::new(&build_cv(p), b, rank_tol)
}

/// Closed-form upper bounds for `x = M†b`.
pub fn cv_ls_cn_upper(p: &CvParams, b: &[f64], rank_tol: Option<f64>) -> Result<CnReport> {
    let prob = ls_setup(p, b, rank_tol)?;
    let ctx = LsCtx::new(&prob);
    let t = CvTerms::new(p, &ctx.pc)?;
    let st = t.s.transpose();
    let rx = t.r.matvec(ctx.x());
    let st_r = st.matvec(ctx.r());
    let st_y = st.matvec(&ctx.y);
    let pm = ctx.pc.p();
    let mut acc = ctx.new_acc();
    for (i, ci) in p.c.iter().enumerate() {
        acc.add_scaled(&pm.column(i), ci.abs() * rx[i].abs());
    }
    for (i, ci) in p.c.iter().enumerate() {
        acc.add_scaled(&t.ppt_rt.column(i), ci.abs() * ctx.r()[i].abs());
    }
    for (i, ci) in p.c.iter().enumerate() {
        acc.add_scaled(&t.f_rt.column(i), ci.abs() * ctx.y[i].abs());
    }
    for (j, dj) in p.d.iter().enumerate() {
        acc.add_scaled(&t.ps.column(j), dj.abs() * ctx.x()[j].abs());
    }
    for (j, dj) in p.d.iter().enumerate() {
        acc.add_scaled(&ctx.pc.ppt.column(j), dj.abs() * st_r[j].abs());
    }
    for (j, dj) in p.d.iter().enumerate() {
        acc.add_scaled(&ctx.pc.f().column(j), dj.abs() * st_y[j].abs());
    }
    ctx.add_rhs_term(&mut acc);
    ctx.report(acc.finish(), CnMode::UpperBound)
}

/// Closed-form exact values for `x = M†b` when `M` has full column rank.
pub fn cv_ls_cn_exact_fullrank(p: &CvParams, b: &[f64], rank_tol: Option<f64>) -> Result<CnReport> {
    let prob = ls_setup(p, b, rank_tol)?;
    if prob.bundle.rank != p.n {
        return Err(Error::NotFullColumnRank {
            rank: prob.bundle.rank,
            cols: p.n,
        });
    }
    let ctx = LsCtx::new(&prob);
    let t = CvTerms::new(p, &ctx.pc)?;
    let st_r = t.s.transpose().matvec(ctx.r());
    let rx = t.r.matvec(ctx.x());
    let pm = ctx.pc.p();
    let mut acc = ctx.new_acc();
    for (i, ci) in p.c.iter().enumerate() {
        acc.add_abs_diff(&pm.column(i), rx[i], &t.ppt_rt.column(i), ctx.r()[i], ci.abs());
    }
    for (j, dj) in p.d.iter().enumerate() {
        acc.add_abs_diff(&t.ps.column(j), ctx.x()[j], &ctx.pc.ppt.column(j), st_r[j], dj.abs());
    }
    ctx.add_rhs_term(&mut acc);
    ctx.report(acc.finish(), CnMode::ExactFullRank)
}

//! {1,1}-quasiseparable matrices.
//!
//! A matrix of order `n` is generated from seven parameter groups
//! (`7n − 8` values):
//!
//! * lower entry `(i, j)`, `i > j`: `a_i e_{i−1} ⋯ e_{j+1} b_j`
//! * diagonal entry: `d_i`
//! * upper entry `(i, j)`, `i < j`: `f_i g_{i+1} ⋯ g_{j−1} h_j`
//!
//! with 1-based index ranges `a, h: 2..n`, `e, g: 2..n−1`, `b, f: 1..n−1`,
//! `d: 1..n`. Storage is 0-based, so `a[0]` holds `a_2`.
//!
//! The tangent form replaces the lower and upper chains by rotations:
//! `t_i` gives `(p_i, q_i) = (1, t_i)/√(1+t_i²)` and `w_i` gives `(r_i, s_i)`,
//! for `5n − 6` free parameters `[t, u, d, v, w]`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::framework::{
    ls_cn_unstructured_with, pinv_cn_unstructured_with, LsCtx, LsProblem, PinvCtx,
};
use crate::linalg::{pinv, Matrix, PinvBundle};
use crate::model::{check_finite, check_len, unit, CnMode, CnReport, Derivative, MatrixModel};

/// Generators of a quasiseparable matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct QsParams {
    pub a: Vec<f64>,
    pub e: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl QsParams {
    /// Checks group lengths against `n = d.len() ≥ 2` and finiteness.
    pub fn new(
        a: Vec<f64>,
        e: Vec<f64>,
        b: Vec<f64>,
        d: Vec<f64>,
        f: Vec<f64>,
        g: Vec<f64>,
        h: Vec<f64>,
    ) -> Result<Self> {
        let p = Self { a, e, b, d, f, g, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.d.len();
        if n < 2 {
            return Err(Error::InvalidArgument("quasiseparable order must be at least 2"));
        }
        check_len("a", n - 1, self.a.len())?;
        check_len("e", n - 2, self.e.len())?;
        check_len("b", n - 1, self.b.len())?;
        check_len("f", n - 1, self.f.len())?;
        check_len("g", n - 2, self.g.len())?;
        check_len("h", n - 1, self.h.len())?;
        for (name, v) in self.groups() {
            check_finite(name, v)?;
        }
        Ok(())
    }

    fn groups(&self) -> [(&'static str, &Vec<f64>); 7] {
        [
            ("a", &self.a),
            ("e", &self.e),
            ("b", &self.b),
            ("d", &self.d),
            ("f", &self.f),
            ("g", &self.g),
            ("h", &self.h),
        ]
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// `[a, e, b, d, f, g, h]`
    pub fn psi(&self) -> Vec<f64> {
        self.groups().iter().flat_map(|(_, v)| v.iter().copied()).collect()
    }

    /// Inverse of [`QsParams::psi`].
    pub fn from_psi(n: usize, psi: &[f64]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("quasiseparable order must be at least 2"));
        }
        check_len("QS parameters", 7 * n - 8, psi.len())?;
        let lens = [n - 1, n - 2, n - 1, n, n - 1, n - 2, n - 1];
        let mut parts = Vec::with_capacity(7);
        let mut at = 0;
        for l in lens {
            parts.push(psi[at..at + l].to_vec());
            at += l;
        }
        let mut it = parts.into_iter();
        let mut next = || it.next().unwrap_or_default();
        QsParams::new(next(), next(), next(), next(), next(), next(), next())
    }

    pub fn model(&self) -> QsModel {
        QsModel { n: self.n() }
    }
}

/// Tangent generators of a quasiseparable matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GvTangentParams {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub d: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl GvTangentParams {
    pub fn new(t: Vec<f64>, u: Vec<f64>, d: Vec<f64>, v: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let p = Self { t, u, d, v, w };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.d.len();
        if n < 2 {
            return Err(Error::InvalidArgument("quasiseparable order must be at least 2"));
        }
        check_len("t", n - 2, self.t.len())?;
        check_len("u", n - 1, self.u.len())?;
        check_len("v", n - 1, self.v.len())?;
        check_len("w", n - 2, self.w.len())?;
        for (name, v) in [
            ("t", &self.t),
            ("u", &self.u),
            ("d", &self.d),
            ("v", &self.v),
            ("w", &self.w),
        ] {
            check_finite(name, v)?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// `[t, u, d, v, w]`
    pub fn psi(&self) -> Vec<f64> {
        [&self.t, &self.u, &self.d, &self.v, &self.w]
            .iter()
            .flat_map(|v| v.iter().copied())
            .collect()
    }

    pub fn from_psi(n: usize, psi: &[f64]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("quasiseparable order must be at least 2"));
        }
        check_len("GV parameters", 5 * n - 6, psi.len())?;
        let (t, rest) = psi.split_at(n - 2);
        let (u, rest) = rest.split_at(n - 1);
        let (d, rest) = rest.split_at(n);
        let (v, w) = rest.split_at(n - 1);
        GvTangentParams::new(t.to_vec(), u.to_vec(), d.to_vec(), v.to_vec(), w.to_vec())
    }

    pub fn model(&self) -> GvModel {
        GvModel { n: self.n() }
    }

    /// `(p, q)` from `t` and `(r, s)` from `w`.
    pub fn rotations(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let (p, q): (Vec<f64>, Vec<f64>) = self.t.iter().map(|t| cos_sin(*t)).unzip();
        let (r, s): (Vec<f64>, Vec<f64>) = self.w.iter().map(|w| cos_sin(*w)).unzip();
        (p, q, r, s)
    }
}

/// `(1/√(1+t²), t/√(1+t²))` without overflow for large `|t|`.
pub fn cos_sin(t: f64) -> (f64, f64) {
    let hyp = libm::hypot(1.0, t);
    (1.0 / hyp, t / hyp)
}

pub fn build_qs(p: &QsParams) -> Matrix {
    let n = p.n();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = p.d[i];
    }
    for j in 0..n.saturating_sub(1) {
        let mut chain = 1.0;
        for i in j + 1..n {
            if i > j + 1 {
                chain *= p.e[i - 2];
            }
            m[(i, j)] = p.a[i - 1] * chain * p.b[j];
        }
    }
    for i in 0..n.saturating_sub(1) {
        let mut chain = 1.0;
        for j in i + 1..n {
            if j > i + 1 {
                chain *= p.g[j - 2];
            }
            m[(i, j)] = p.f[i] * chain * p.h[j - 1];
        }
    }
    m
}

/// Strictly lower, diagonal and strictly upper parts.
#[derive(Clone, Debug, PartialEq)]
pub struct LduSplit {
    pub l: Matrix,
    pub dm: Matrix,
    pub um: Matrix,
}

pub fn split_ldu(m: &Matrix) -> Result<LduSplit> {
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::ShapeMismatch {
            op: "split_ldu",
            left: (r, c),
            right: (c, r),
        });
    }
    Ok(LduSplit {
        l: Matrix::from_fn(r, r, |i, j| if i > j { m[(i, j)] } else { 0.0 }),
        dm: Matrix::from_fn(r, r, |i, j| if i == j { m[(i, j)] } else { 0.0 }),
        um: Matrix::from_fn(r, r, |i, j| if i < j { m[(i, j)] } else { 0.0 }),
    })
}

/// Quasiseparable generators induced by the tangent form, and the matrix.
pub fn gv_expand(p: &GvTangentParams) -> (QsParams, Matrix) {
    let (pc, qs, rc, ss) = p.rotations();
    let mut a = pc;
    a.push(1.0);
    let mut h = rc;
    h.push(1.0);
    let q = QsParams {
        a,
        e: qs,
        b: p.u.clone(),
        d: p.d.clone(),
        f: p.v.clone(),
        g: ss,
        h,
    };
    let m = build_qs(&q);
    (q, m)
}

/// `ψ_k·∂M/∂ψ_k` for every group except `d`, which is `∂M/∂d_i = e_i e_iᵀ`.
/// Order `[a, e, b, d, f, g, h]`.
pub fn qs_derivatives(p: &QsParams) -> Vec<Derivative> {
    let n = p.n();
    let m = build_qs(p);
    let s = split_ldu(&m).expect("square");
    let mut out = Vec::with_capacity(7 * n - 8);
    for k in 0..n - 1 {
        out.push(Derivative::rank_one(unit(n, k + 1), s.l.row(k + 1).to_vec()).premultiplied());
    }
    for k in 0..n.saturating_sub(2) {
        out.push(Derivative::block(k + 2, 0, m.submatrix(k + 2, n, 0, k + 1)).premultiplied());
    }
    for k in 0..n - 1 {
        out.push(Derivative::rank_one(s.l.column(k), unit(n, k)).premultiplied());
    }
    for k in 0..n {
        out.push(Derivative::rank_one(unit(n, k), unit(n, k)));
    }
    for k in 0..n - 1 {
        out.push(Derivative::rank_one(unit(n, k), s.um.row(k).to_vec()).premultiplied());
    }
    for k in 0..n.saturating_sub(2) {
        out.push(Derivative::block(0, k + 2, m.submatrix(0, k + 1, k + 2, n)).premultiplied());
    }
    for k in 0..n - 1 {
        out.push(Derivative::rank_one(s.um.column(k + 1), unit(n, k + 1)).premultiplied());
    }
    out
}

/// Lower rotation block for `t_i` (0-based `k = i − 2`): row `i` of the
/// lower triangle scaled by `−q_i²`, rows below scaled by `p_i²`.
fn k_block(m: &Matrix, k: usize, p: f64, q: f64) -> Derivative {
    let n = m.rows();
    let mut blk = m.submatrix(k + 1, n, 0, k + 1);
    let (pp, qq) = (p * p, q * q);
    for i in 0..blk.rows() {
        let s = if i == 0 { -qq } else { pp };
        for j in 0..blk.cols() {
            blk[(i, j)] *= s;
        }
    }
    Derivative::block(k + 1, 0, blk).premultiplied()
}

/// Upper rotation block for `w_i`: column `i` of the upper triangle scaled
/// by `−s_i²`, columns to its right scaled by `r_i²`.
fn l_block(m: &Matrix, k: usize, r: f64, s: f64) -> Derivative {
    let n = m.rows();
    let mut blk = m.submatrix(0, k + 1, k + 1, n);
    let (rr, ss) = (r * r, s * s);
    for i in 0..blk.rows() {
        for j in 0..blk.cols() {
            blk[(i, j)] *= if j == 0 { -ss } else { rr };
        }
    }
    Derivative::block(0, k + 1, blk).premultiplied()
}

/// Descriptors in order `[t, u, d, v, w]`; `u` and `v` share the `b` and `f`
/// forms of [`qs_derivatives`].
pub fn gv_derivatives(p: &GvTangentParams) -> Vec<Derivative> {
    let n = p.n();
    let (_, m) = gv_expand(p);
    let (pc, qs, rc, ss) = p.rotations();
    let s = split_ldu(&m).expect("square");
    let mut out = Vec::with_capacity(5 * n - 6);
    for k in 0..n.saturating_sub(2) {
        out.push(k_block(&m, k, pc[k], qs[k]));
    }
    for k in 0..n - 1 {
        out.push(Derivative::rank_one(s.l.column(k), unit(n, k)).premultiplied());
    }
    for k in 0..n {
        out.push(Derivative::rank_one(unit(n, k), unit(n, k)));
    }
    for k in 0..n - 1 {
        out.push(Derivative::rank_one(unit(n, k), s.um.row(k).to_vec()).premultiplied());
    }
    for k in 0..n.saturating_sub(2) {
        out.push(l_block(&m, k, rc[k], ss[k]));
    }
    out
}

/// [`MatrixModel`] over `[a, e, b, d, f, g, h]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QsModel {
    pub n: usize,
}

fn group_labels(groups: &[(&str, usize, usize)]) -> Vec<String> {
    groups
        .iter()
        .flat_map(|(name, first, len)| (0..*len).map(move |k| format!("{name}{}", first + k)))
        .collect()
}

impl MatrixModel for QsModel {
    fn shape(&self) -> (usize, usize) {
        (self.n, self.n)
    }

    fn param_count(&self) -> usize {
        7 * self.n - 8
    }

    fn labels(&self) -> Vec<String> {
        let n = self.n;
        group_labels(&[
            ("a", 2, n - 1),
            ("e", 2, n - 2),
            ("b", 1, n - 1),
            ("d", 1, n),
            ("f", 1, n - 1),
            ("g", 2, n - 2),
            ("h", 2, n - 1),
        ])
    }

    fn check_domain(&self, psi: &[f64]) -> Result<()> {
        QsParams::from_psi(self.n, psi).map(|_| ())
    }

    fn eval(&self, psi: &[f64]) -> Result<Matrix> {
        Ok(build_qs(&QsParams::from_psi(self.n, psi)?))
    }

    fn derivatives(&self, psi: &[f64]) -> Result<Vec<Derivative>> {
        Ok(qs_derivatives(&QsParams::from_psi(self.n, psi)?))
    }
}

/// [`MatrixModel`] over the tangent parameters `[t, u, d, v, w]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GvModel {
    pub n: usize,
}

impl MatrixModel for GvModel {
    fn shape(&self) -> (usize, usize) {
        (self.n, self.n)
    }

    fn param_count(&self) -> usize {
        5 * self.n - 6
    }

    fn labels(&self) -> Vec<String> {
        let n = self.n;
        group_labels(&[
            ("t", 2, n - 2),
            ("u", 1, n - 1),
            ("d", 1, n),
            ("v", 1, n - 1),
            ("w", 2, n - 2),
        ])
    }

    fn check_domain(&self, psi: &[f64]) -> Result<()> {
        GvTangentParams::from_psi(self.n, psi).map(|_| ())
    }

    fn eval(&self, psi: &[f64]) -> Result<Matrix> {
        Ok(gv_expand(&GvTangentParams::from_psi(self.n, psi)?).1)
    }

    fn derivatives(&self, psi: &[f64]) -> Result<Vec<Derivative>> {
        Ok(gv_derivatives(&GvTangentParams::from_psi(self.n, psi)?))
    }
}

/// Products of one triangular part `T` with `M†` and the projectors.
struct TriTerms {
    /// `T M†`
    tp: Matrix,
    /// `M†M†ᵀTᵀ`
    ppt_tt: Matrix,
    /// `F Tᵀ`
    f_tt: Matrix,
    /// `M† T`
    pt: Matrix,
    /// `Tᵀ E`
    tt_e: Matrix,
    /// `Tᵀ M†ᵀM†`
    tt_ptp: Matrix,
    t: Matrix,
}

impl TriTerms {
    fn new(t: Matrix, ctx: &PinvCtx<'_>) -> Self {
        let tt = t.transpose();
        Self {
            tp: t.mul(ctx.p()),
            ppt_tt: ctx.ppt.mul(&tt),
            f_tt: ctx.f().mul(&tt),
            pt: ctx.p().mul(&t),
            tt_e: tt.mul(ctx.e()),
            tt_ptp: tt.mul(&ctx.ptp),
            t,
        }
    }
}

/// Pseudoinverse kernel pieces, each a sum of `|A||B|` outer products.
struct PinvAssembly<'a> {
    ctx: PinvCtx<'a>,
    acc: crate::accum::MatAcc,
}

impl<'a> PinvAssembly<'a> {
    fn new(bundle: &'a PinvBundle) -> Self {
        let ctx = PinvCtx::new(bundle);
        let acc = ctx.new_acc();
        Self { ctx, acc }
    }

    /// `|M†||D||M†| + |M†M†ᵀ||D||E| + |F||D||M†ᵀM†|`
    fn diagonal(&mut self, d: &[f64]) {
        let (p, e, f, ptp) = (self.ctx.p(), self.ctx.e(), self.ctx.f(), &self.ctx.ptp);
        for (i, di) in d.iter().enumerate() {
            self.acc.add_outer(&p.column(i), p.row(i), di.abs());
        }
        for (i, di) in d.iter().enumerate() {
            self.acc.add_outer(&self.ctx.ppt.column(i), e.row(i), di.abs());
        }
        for (i, di) in d.iter().enumerate() {
            self.acc.add_outer(&f.column(i), ptp.row(i), di.abs());
        }
    }

    /// `|M†||TM†| + |M†M†ᵀTᵀ||E| + |FTᵀ||M†ᵀM†|` over the given rows of `T`.
    fn row_group(&mut self, t: &TriTerms, rows: core::ops::Range<usize>) {
        let p = self.ctx.p();
        for i in rows.clone() {
            self.acc.add_outer(&p.column(i), t.tp.row(i), 1.0);
        }
        for i in rows.clone() {
            self.acc.add_outer(&t.ppt_tt.column(i), self.ctx.e().row(i), 1.0);
        }
        for i in rows {
            self.acc.add_outer(&t.f_tt.column(i), self.ctx.ptp.row(i), 1.0);
        }
    }

    /// `|M†T||M†| + |M†M†ᵀ||TᵀE| + |F||TᵀM†ᵀM†|` over the given columns of `T`.
    fn col_group(&mut self, t: &TriTerms, cols: core::ops::Range<usize>) {
        let p = self.ctx.p();
        for j in cols.clone() {
            self.acc.add_outer(&t.pt.column(j), p.row(j), 1.0);
        }
        for j in cols.clone() {
            self.acc.add_outer(&self.ctx.ppt.column(j), t.tt_e.row(j), 1.0);
        }
        for j in cols {
            self.acc.add_outer(&self.ctx.f().column(j), t.tt_ptp.row(j), 1.0);
        }
    }

    fn blocks(&mut self, blocks: &[Derivative]) {
        for d in blocks {
            self.ctx.add_upper(&mut self.acc, d, 1.0);
        }
    }

    fn finish(self) -> Result<CnReport> {
        let k = self.acc.finish();
        self.ctx.report(k, CnMode::UpperBound)
    }
}

struct LsAssembly<'a> {
    ctx: LsCtx<'a>,
    acc: crate::accum::VecAcc,
}

impl<'a> LsAssembly<'a> {
    fn new(prob: &'a LsProblem) -> Self {
        let ctx = LsCtx::new(prob);
        let acc = ctx.new_acc();
        Self { ctx, acc }
    }

    fn diagonal(&mut self, d: &[f64]) {
        let c = &self.ctx;
        for (i, di) in d.iter().enumerate() {
            self.acc.add_scaled(&c.pc.p().column(i), di.abs() * c.x()[i].abs());
        }
        for (i, di) in d.iter().enumerate() {
            self.acc.add_scaled(&c.pc.ppt.column(i), di.abs() * c.r()[i].abs());
        }
        for (i, di) in d.iter().enumerate() {
            self.acc.add_scaled(&c.pc.f().column(i), di.abs() * c.y[i].abs());
        }
    }

    /// `|M†||Tx| + |M†M†ᵀTᵀ||r| + |FTᵀ||M†ᵀx|` over rows of `T`.
    fn row_group(&mut self, t: &TriTerms, rows: core::ops::Range<usize>) {
        let c = &self.ctx;
        let tx = t.t.matvec(c.x());
        for i in rows.clone() {
            self.acc.add_scaled(&c.pc.p().column(i), tx[i].abs());
        }
        for i in rows.clone() {
            self.acc.add_scaled(&t.ppt_tt.column(i), c.r()[i].abs());
        }
        for i in rows {
            self.acc.add_scaled(&t.f_tt.column(i), c.y[i].abs());
        }
    }

    /// `|M†T||x| + |M†M†ᵀ||Tᵀr| + |F||TᵀM†ᵀx|` over columns of `T`.
    fn col_group(&mut self, t: &TriTerms, cols: core::ops::Range<usize>) {
        let c = &self.ctx;
        let tt = t.t.transpose();
        let ttr = tt.matvec(c.r());
        let tty = tt.matvec(&c.y);
        for j in cols.clone() {
            self.acc.add_scaled(&t.pt.column(j), c.x()[j].abs());
        }
        for j in cols.clone() {
            self.acc.add_scaled(&c.pc.ppt.column(j), ttr[j].abs());
        }
        for j in cols {
            self.acc.add_scaled(&c.pc.f().column(j), tty[j].abs());
        }
    }

    fn blocks(&mut self, blocks: &[Derivative]) {
        for d in blocks {
            self.ctx.add_upper(&mut self.acc, d, 1.0);
        }
    }

    fn finish(mut self) -> Result<CnReport> {
        self.ctx.add_rhs_term(&mut self.acc);
        let k = self.acc.finish();
        self.ctx.report(k, CnMode::UpperBound)
    }
}

fn e_blocks(m: &Matrix) -> Vec<Derivative> {
    let n = m.rows();
    (0..n.saturating_sub(2))
        .map(|k| Derivative::block(k + 2, 0, m.submatrix(k + 2, n, 0, k + 1)).premultiplied())
        .collect()
}

fn g_blocks(m: &Matrix) -> Vec<Derivative> {
    let n = m.rows();
    (0..n.saturating_sub(2))
        .map(|k| Derivative::block(0, k + 2, m.submatrix(0, k + 1, k + 2, n)).premultiplied())
        .collect()
}

fn gv_blocks(p: &GvTangentParams, m: &Matrix) -> (Vec<Derivative>, Vec<Derivative>) {
    let (pc, qs, rc, ss) = p.rotations();
    let k = (0..p.t.len()).map(|k| k_block(m, k, pc[k], qs[k])).collect();
    let l = (0..p.w.len()).map(|k| l_block(m, k, rc[k], ss[k])).collect();
    (k, l)
}

fn qs_pinv(p: &QsParams, rank_tol: Option<f64>, full: bool) -> Result<CnReport> {
    p.validate()?;
    let m = build_qs(p);
    let n = p.n();
    let bundle = pinv(&m, rank_tol)?;
    let split = split_ldu(&m)?;
    let mut asm = PinvAssembly::new(&bundle);
    let lt = TriTerms::new(split.l, &asm.ctx);
    let ut = TriTerms::new(split.um, &asm.ctx);
    asm.diagonal(&p.d);
    asm.row_group(&lt, 1..n);
    asm.col_group(&lt, 0..n - 1);
    asm.row_group(&ut, 0..n - 1);
    asm.col_group(&ut, 1..n);
    if full {
        asm.blocks(&e_blocks(&m));
        asm.blocks(&g_blocks(&m));
    }
    asm.finish()
}

fn qs_ls(p: &QsParams, b: &[f64], rank_tol: Option<f64>, full: bool) -> Result<CnReport> {
    p.validate()?;
    let m = build_qs(p);
    let n = p.n();
    let prob = LsProblem::new(&m, b, rank_tol)?;
    let split = split_ldu(&m)?;
    let mut asm = LsAssembly::new(&prob);
    let lt = TriTerms::new(split.l, &asm.ctx.pc);
    let ut = TriTerms::new(split.um, &asm.ctx.pc);
    asm.diagonal(&p.d);
    asm.row_group(&lt, 1..n);
    asm.col_group(&lt, 0..n - 1);
    asm.row_group(&ut, 0..n - 1);
    asm.col_group(&ut, 1..n);
    if full {
        asm.blocks(&e_blocks(&m));
        asm.blocks(&g_blocks(&m));
    }
    asm.finish()
}

/// Closed-form upper bounds for `M†` under perturbations of the seven
/// generator groups.
pub fn qs_pinv_cn_upper(p: &QsParams, rank_tol: Option<f64>) -> Result<CnReport> {
    qs_pinv(p, rank_tol, true)
}

/// Closed-form upper bounds for `x = M†b` under perturbations of the
/// generators and `b`.
pub fn qs_ls_cn_upper(p: &QsParams, b: &[f64], rank_tol: Option<f64>) -> Result<CnReport> {
    qs_ls(p, b, rank_tol, true)
}

/// Effective condition numbers for `M†`: the generator kernel without the
/// `e` and `g` block sums.
pub fn qs_effective_pinv_cn(p: &QsParams, rank_tol: Option<f64>) -> Result<CnReport> {
    qs_pinv(p, rank_tol, false)
}

/// Effective condition numbers for `x = M†b`.
pub fn qs_effective_ls_cn(p: &QsParams, b: &[f64], rank_tol: Option<f64>) -> Result<CnReport> {
    qs_ls(p, b, rank_tol, false)
}

/// Closed-form upper bounds for `M†` under perturbations of the tangent
/// parameters.
pub fn gv_pinv_cn_upper(p: &GvTangentParams, rank_tol: Option<f64>) -> Result<CnReport> {
    p.validate()?;
    let (_, m) = gv_expand(p);
    let n = p.n();
    let bundle = pinv(&m, rank_tol)?;
    let split = split_ldu(&m)?;
    let (kb, lb) = gv_blocks(p, &m);
    let mut asm = PinvAssembly::new(&bundle);
    let lt = TriTerms::new(split.l, &asm.ctx);
    let ut = TriTerms::new(split.um, &asm.ctx);
    asm.diagonal(&p.d);
    asm.col_group(&lt, 0..n - 1);
    asm.row_group(&ut, 0..n - 1);
    asm.blocks(&kb);
    asm.blocks(&lb);
    asm.finish()
}

/// Closed-form upper bounds for `x = M†b` under perturbations of the
/// tangent parameters and `b`.
pub fn gv_ls_cn_upper(p: &GvTangentParams, b: &[f64], rank_tol: Option<f64>) -> Result<CnReport> {
    p.validate()?;
    let (_, m) = gv_expand(p);
    let n = p.n();
    let prob = LsProblem::new(&m, b, rank_tol)?;
    let split = split_ldu(&m)?;
    let (kb, lb) = gv_blocks(p, &m);
    let mut asm = LsAssembly::new(&prob);
    let lt = TriTerms::new(split.l, &asm.ctx.pc);
    let ut = TriTerms::new(split.um, &asm.ctx.pc);
    asm.diagonal(&p.d);
    asm.col_group(&lt, 0..n - 1);
    asm.row_group(&ut, 0..n - 1);
    asm.blocks(&kb);
    asm.blocks(&lb);
    asm.finish()
}

/// Another generator set of the same matrix: `b → τb`, `a → a/τ`.
pub fn rescale_qs_representation(p: &QsParams, tau: f64) -> Result<QsParams> {
    if tau == 0.0 || !tau.is_finite() {
        return Err(Error::InvalidArgument("tau must be finite and nonzero"));
    }
    let mut q = p.clone();
    for v in &mut q.b {
        *v *= tau;
    }
    for v in &mut q.a {
        *v /= tau;
    }
    Ok(q)
}

/// Relative slack allowed on every proved inequality.
pub const INEQUALITY_SLACK: f64 = 1e-10;

/// Either generator form.
#[derive(Clone, Debug, PartialEq)]
pub enum QsInstance {
    Qs(QsParams),
    Gv(GvTangentParams),
}

impl QsInstance {
    pub fn n(&self) -> usize {
        match self {
            QsInstance::Qs(p) => p.n(),
            QsInstance::Gv(p) => p.n(),
        }
    }

    /// Generators of the quasiseparable form (induced ones for tangents).
    pub fn qs_params(&self) -> QsParams {
        match self {
            QsInstance::Qs(p) => p.clone(),
            QsInstance::Gv(p) => gv_expand(p).0,
        }
    }

    pub fn matrix(&self) -> Matrix {
        match self {
            QsInstance::Qs(p) => build_qs(p),
            QsInstance::Gv(p) => gv_expand(p).1,
        }
    }
}

/// The four report families for one problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportSet {
    pub structured_qs: CnReport,
    /// Only present for tangent input.
    pub structured_gv: Option<CnReport>,
    pub effective: CnReport,
    pub unstructured: CnReport,
}

/// One checked inequality `lhs ≤ factor·rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub name: &'static str,
    /// `"pinv"` or `"ls"`.
    pub problem: &'static str,
    /// `"mixed"` or `"componentwise"`.
    pub measure: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub factor: f64,
    /// `1 − lhs/(factor·rhs)`; negative when violated.
    pub margin: f64,
    pub pass: bool,
}

impl Verdict {
    fn check(
        name: &'static str,
        problem: &'static str,
        measure: &'static str,
        lhs: f64,
        factor: f64,
        rhs: f64,
    ) -> Self {
        let bound = factor * rhs;
        let margin = if bound == 0.0 {
            if lhs == 0.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            1.0 - lhs / bound
        };
        Verdict {
            name,
            problem,
            measure,
            lhs,
            rhs,
            factor,
            margin,
            pass: lhs <= bound * (1.0 + INEQUALITY_SLACK),
        }
    }
}

/// All report families of one instance plus the inequality verdicts.
#[derive(Clone, Debug, PartialEq)]
pub struct QsCnComparison {
    pub n: usize,
    pub pinv: ReportSet,
    pub ls: Option<ReportSet>,
    pub verdicts: Vec<Verdict>,
}

impl QsCnComparison {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

fn verdicts_for(set: &ReportSet, n: usize, problem: &'static str, out: &mut Vec<Verdict>) {
    let nf = n as f64;
    let measures: [(&'static str, fn(&CnReport) -> f64); 2] =
        [("mixed", |r| r.mixed), ("componentwise", |r| r.componentwise)];
    for (measure, get) in measures {
        let qs = get(&set.structured_qs);
        let eff = get(&set.effective);
        let un = get(&set.unstructured);
        out.push(Verdict::check("qs<=n*unstructured", problem, measure, qs, nf, un));
        if let Some(gv) = &set.structured_gv {
            out.push(Verdict::check("gv<=qs", problem, measure, get(gv), 1.0, qs));
        }
        out.push(Verdict::check("effective<=full", problem, measure, eff, 1.0, qs));
        out.push(Verdict::check("full<=(n-1)*effective", problem, measure, qs, nf - 1.0, eff));
        out.push(Verdict::check("effective<=2*unstructured", problem, measure, eff, 2.0, un));
    }
}

/// Computes structured (generator and, for tangent input, rotation),
/// effective and unstructured reports and checks the inequalities between
/// them. `gv<=qs` is only checked for tangent input.
pub fn compare_all(
    inst: &QsInstance,
    b: Option<&[f64]>,
    rank_tol: Option<f64>,
) -> Result<QsCnComparison> {
    let q = inst.qs_params();
    let n = q.n();
    let m = build_qs(&q);
    let pinv_set = ReportSet {
        structured_qs: qs_pinv_cn_upper(&q, rank_tol)?,
        structured_gv: match inst {
            QsInstance::Gv(g) => Some(gv_pinv_cn_upper(g, rank_tol)?),
            QsInstance::Qs(_) => None,
        },
        effective: qs_effective_pinv_cn(&q, rank_tol)?,
        unstructured: pinv_cn_unstructured_with(&pinv(&m, rank_tol)?)?,
    };
    let ls_set = match b {
        Some(b) => Some(ReportSet {
            structured_qs: qs_ls_cn_upper(&q, b, rank_tol)?,
            structured_gv: match inst {
                QsInstance::Gv(g) => Some(gv_ls_cn_upper(g, b, rank_tol)?),
                QsInstance::Qs(_) => None,
            },
            effective: qs_effective_ls_cn(&q, b, rank_tol)?,
            unstructured: ls_cn_unstructured_with(&LsProblem::new(&m, b, rank_tol)?)?,
        }),
        None => None,
    };
    let mut verdicts = Vec::new();
    verdicts_for(&pinv_set, n, "pinv", &mut verdicts);
    if let Some(s) = &ls_set {
        verdicts_for(s, n, "ls", &mut verdicts);
    }
    Ok(QsCnComparison {
        n,
        pinv: pinv_set,
        ls: ls_set,
        verdicts,
    })
}

/// All-ones generators of order `n`.
pub fn qs_ones(n: usize) -> QsParams {
    QsParams {
        a: vec![1.0; n - 1],
        e: vec![1.0; n.saturating_sub(2)],
        b: vec![1.0; n - 1],
        d: vec![1.0; n],
        f: vec![1.0; n - 1],
        g: vec![1.0; n.saturating_sub(2)],
        h: vec![1.0; n - 1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_by_three_products() {
        let p = QsParams::new(
            vec![2.0, 3.0],
            vec![5.0],
            vec![7.0, 11.0],
            vec![1.0, 1.0, 1.0],
            vec![13.0, 17.0],
            vec![19.0],
            vec![23.0, 29.0],
        )
        .unwrap();
        let m = build_qs(&p);
        assert_eq!(m[(2, 0)], 105.0);
        assert_eq!(m[(0, 2)], 7163.0);
        assert_eq!(m[(1, 0)], 14.0);
        assert_eq!(m[(2, 1)], 33.0);
        assert_eq!(m[(0, 1)], 13.0 * 23.0);
        assert_eq!(m[(1, 2)], 17.0 * 29.0);
        assert_eq!(p.psi().len(), 13);
        assert_eq!(QsParams::from_psi(3, &p.psi()).unwrap(), p);
    }

    #[test]
    fn ones_e_block() {
        let d = qs_derivatives(&qs_ones(3));
        // order a2 a3 | e2 | ...
        let f2 = d[2].to_dense(3, 3);
        let mut want = Matrix::zeros(3, 3);
        want[(2, 0)] = 1.0;
        assert_eq!(f2, want);
        assert!(d[2].premultiplied);
    }

    #[test]
    fn split_reconstructs() {
        let m = build_qs(&qs_ones(4));
        let s = split_ldu(&m).unwrap();
        assert_eq!(s.l.add(&s.dm).unwrap().add(&s.um).unwrap(), m);
    }

    #[test]
    fn zero_tangents() {
        let p = GvTangentParams::new(
            vec![0.0, 0.0],
            vec![1.0, 2.0, 3.0],
            vec![0.0; 4],
            vec![1.0, 1.0, 1.0],
            vec![0.0, 0.0],
        )
        .unwrap();
        let (_, m) = gv_expand(&p);
        assert_eq!(m[(1, 0)], 1.0);
        assert_eq!(m[(3, 2)], 3.0);
        assert_eq!(m[(2, 0)], 0.0);
        assert_eq!(m[(3, 0)], 0.0);
        assert_eq!(m[(0, 2)], 0.0);
        assert_eq!(m[(0, 1)], 1.0);
    }

    #[test]
    fn huge_tangent_is_finite() {
        let (c, s) = cos_sin(1e150);
        assert!(c > 0.0 && c.is_finite());
        assert!((c * c + s * s - 1.0).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn rescale_identity_and_zero() {
        let p = qs_ones(3);
        assert_eq!(rescale_qs_representation(&p, 1.0).unwrap(), p);
        assert!(rescale_qs_representation(&p, 0.0).is_err());
        let q = rescale_qs_representation(&p, 2.0).unwrap();
        assert_eq!(build_qs(&q)[(1, 0)], 1.0);
    }

    #[test]
    fn order_two_has_no_chains() {
        let p = qs_ones(2);
        assert_eq!(qs_derivatives(&p).len(), 6);
        let c = compare_all(&QsInstance::Qs(p), Some(&[1.0, 0.5]), None).unwrap();
        assert!(c.all_pass());
        let eq = c.pinv.structured_qs.mixed == c.pinv.effective.mixed;
        assert!(eq);
    }
}

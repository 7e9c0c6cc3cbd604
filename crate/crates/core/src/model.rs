//! Parameterized matrices and the reports computed from them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Shape of one partial derivative `∂M/∂ψ_k` (or `ψ_k·∂M/∂ψ_k`).
#[derive(Clone, Debug, PartialEq)]
pub enum DerivShape {
    Dense(Matrix),
    /// `u vᵀ`
    RankOne { u: Vec<f64>, v: Vec<f64> },
    /// Dense block placed at `(row0, col0)`, zero elsewhere.
    Block {
        row0: usize,
        col0: usize,
        block: Matrix,
    },
}

/// One derivative descriptor. When `premultiplied` is set the shape
/// already holds `ψ_k·∂M/∂ψ_k`, so kernels weight it by 1 instead of
/// `|ψ_k|`.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivative {
    pub shape: DerivShape,
    pub premultiplied: bool,
}

impl Derivative {
    pub fn rank_one(u: Vec<f64>, v: Vec<f64>) -> Self {
        Self {
            shape: DerivShape::RankOne { u, v },
            premultiplied: false,
        }
    }

    pub fn dense(m: Matrix) -> Self {
        Self {
            shape: DerivShape::Dense(m),
            premultiplied: false,
        }
    }

    pub fn block(row0: usize, col0: usize, block: Matrix) -> Self {
        Self {
            shape: DerivShape::Block { row0, col0, block },
            premultiplied: false,
        }
    }

    pub fn premultiplied(mut self) -> Self {
        self.premultiplied = true;
        self
    }

    /// Kernel weight for this descriptor at parameter value `psi_k`.
    #[inline]
    pub fn weight(&self, psi_k: f64) -> f64 {
        if self.premultiplied {
            1.0
        } else {
            psi_k.abs()
        }
    }

    /// Dense `rows × cols` form of the stored shape.
    pub fn to_dense(&self, rows: usize, cols: usize) -> Matrix {
        match &self.shape {
            DerivShape::Dense(m) => m.clone(),
            DerivShape::RankOne { u, v } => Matrix::from_fn(rows, cols, |i, j| u[i] * v[j]),
            DerivShape::Block { row0, col0, block } => {
                let mut m = Matrix::zeros(rows, cols);
                for i in 0..block.rows() {
                    for j in 0..block.cols() {
                        m[(row0 + i, col0 + j)] = block[(i, j)];
                    }
                }
                m
            }
        }
    }
}

/// A matrix whose entries are differentiable functions of a parameter
/// vector.
pub trait MatrixModel {
    /// `(m, n)` of the evaluated matrix.
    fn shape(&self) -> (usize, usize);

    fn param_count(&self) -> usize;

    /// One label per parameter, in parameter order.
    fn labels(&self) -> Vec<String>;

    fn check_domain(&self, psi: &[f64]) -> Result<()>;

    fn eval(&self, psi: &[f64]) -> Result<Matrix>;

    /// Exactly `param_count()` descriptors in parameter order.
    fn derivatives(&self, psi: &[f64]) -> Result<Vec<Derivative>>;
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what,
            expected,
            got,
        })
    }
}

pub(crate) fn check_finite(what: &str, v: &[f64]) -> Result<()> {
    if let Some(k) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidDomain(format!("{what}[{k}] is not finite")));
    }
    Ok(())
}

/// Parameter values with their labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSet {
    pub values: Vec<f64>,
    pub labels: Vec<String>,
}

impl ParamSet {
    pub fn for_model<M: MatrixModel + ?Sized>(model: &M, values: Vec<f64>) -> Result<Self> {
        check_len("parameters", model.param_count(), values.len())?;
        Ok(Self {
            labels: model.labels(),
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Which formula produced a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CnMode {
    UpperBound,
    ExactFullRank,
    Unstructured,
    RangeRestricted,
}

impl CnMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CnMode::UpperBound => "upper_bound",
            CnMode::ExactFullRank => "exact_full_rank",
            CnMode::Unstructured => "unstructured",
            CnMode::RangeRestricted => "range_restricted",
        }
    }
}

/// The nonnegative quantity whose norms give the condition numbers.
#[derive(Clone, Debug, PartialEq)]
pub enum Kernel {
    Matrix(Matrix),
    Vector(Vec<f64>),
}

/// Mixed and componentwise condition numbers with their kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct CnReport {
    pub mixed: f64,
    pub componentwise: f64,
    pub kernel: Kernel,
    pub rank: usize,
    pub mode: CnMode,
    pub tol_used: f64,
}

/// Model whose parameters are the entries of an `m × n` matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EntrywiseModel {
    pub rows: usize,
    pub cols: usize,
}

/// Entrywise model of `m` and its parameter vector (the row-major entries).
pub fn entrywise_model(m: &Matrix) -> (EntrywiseModel, Vec<f64>) {
    (
        EntrywiseModel {
            rows: m.rows(),
            cols: m.cols(),
        },
        m.as_slice().to_vec(),
    )
}

impl MatrixModel for EntrywiseModel {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn param_count(&self) -> usize {
        self.rows * self.cols
    }

    fn labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(format!("m{},{}", i + 1, j + 1));
            }
        }
        out
    }

    fn check_domain(&self, psi: &[f64]) -> Result<()> {
        check_len("parameters", self.param_count(), psi.len())?;
        check_finite("m", psi)
    }

    fn eval(&self, psi: &[f64]) -> Result<Matrix> {
        self.check_domain(psi)?;
        Matrix::from_row_major(self.rows, self.cols, psi.to_vec())
    }

    fn derivatives(&self, psi: &[f64]) -> Result<Vec<Derivative>> {
        self.check_domain(psi)?;
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let mut u = vec![0.0; self.rows];
                let mut v = vec![0.0; self.cols];
                u[i] = 1.0;
                v[j] = 1.0;
                out.push(Derivative::rank_one(u, v));
            }
        }
        Ok(out)
    }
}

/// Unit vector `e_i` of length `n`.
pub(crate) fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

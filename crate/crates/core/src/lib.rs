//! Structured mixed and componentwise condition numbers for the
//! Moore-Penrose inverse `M†` and the minimum-norm least-squares solution
//! `x = M†b` of parameterized matrices.
//!
//! The generic engine in [`framework`] works for any [`MatrixModel`].
//! [`cv`] and [`qs`] provide Cauchy-Vandermonde and quasiseparable models
//! with closed-form kernels, and [`oracle`] estimates the same quantities
//! from perturbed evaluations only.

#![no_std]

extern crate alloc;

mod accum;
pub mod cv;
pub mod error;
pub mod framework;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod qs;
mod svd;

pub use error::{Error, Result};
pub use framework::{
    ls_cn_exact_fullrank, ls_cn_unstructured, ls_cn_upper, pinv_cn_exact_fullrank,
    pinv_cn_range_restricted, pinv_cn_unstructured, pinv_cn_upper, LsProblem,
};
pub use linalg::{hadamard, norms, pinv, pseudo_divide, Matrix, PinvBundle};
pub use model::{
    entrywise_model, CnMode, CnReport, DerivShape, Derivative, EntrywiseModel, Kernel,
    MatrixModel, ParamSet,
};

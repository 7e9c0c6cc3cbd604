//! JSON instance files.

use pinvcond_core::cv::CvParams;
use pinvcond_core::qs::{GvTangentParams, QsInstance, QsParams};
use pinvcond_core::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One parameterized matrix, tagged by `"type"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Instance {
    Cv {
        c: Vec<f64>,
        d: Vec<f64>,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
    },
    Qs {
        a: Vec<f64>,
        e: Vec<f64>,
        b: Vec<f64>,
        d: Vec<f64>,
        f: Vec<f64>,
        g: Vec<f64>,
        h: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b_rhs: Option<Vec<f64>>,
    },
    Gv {
        t: Vec<f64>,
        u: Vec<f64>,
        d: Vec<f64>,
        v: Vec<f64>,
        w: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b_rhs: Option<Vec<f64>>,
    },
    Dense {
        rows: usize,
        cols: usize,
        entries: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b_rhs: Option<Vec<f64>>,
    },
}

/// An instance after validation against the library types.
#[derive(Clone, Debug)]
pub enum Parsed {
    Cv(CvParams),
    Qs(QsInstance),
    Dense(Matrix),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Cv { .. } => "cv",
            Instance::Qs { .. } => "qs",
            Instance::Gv { .. } => "gv",
            Instance::Dense { .. } => "dense",
        }
    }

    pub fn rhs(&self) -> Option<&[f64]> {
        match self {
            Instance::Cv { b, .. } => b.as_deref(),
            Instance::Qs { b_rhs, .. } | Instance::Gv { b_rhs, .. } | Instance::Dense { b_rhs, .. } => {
                b_rhs.as_deref()
            }
        }
    }

    /// Builds the library parameter object. Length and finiteness problems
    /// are schema errors; node collisions are degenerate instances.
    pub fn parse(&self) -> Result<Parsed, CliError> {
        let parsed = match self.clone() {
            Instance::Cv { c, d, n, .. } => Parsed::Cv(CvParams::new(c, d, n).map_err(schema_or_core)?),
            Instance::Qs { a, e, b, d, f, g, h, .. } => Parsed::Qs(QsInstance::Qs(
                QsParams::new(a, e, b, d, f, g, h).map_err(CliError::schema)?,
            )),
            Instance::Gv { t, u, d, v, w, .. } => Parsed::Qs(QsInstance::Gv(
                GvTangentParams::new(t, u, d, v, w).map_err(CliError::schema)?,
            )),
            Instance::Dense { rows, cols, entries, .. } => {
                if rows == 0 || cols == 0 {
                    return Err(CliError::Schema("dense: rows and cols must be positive".into()));
                }
                Parsed::Dense(Matrix::from_row_major(rows, cols, entries).map_err(CliError::schema)?)
            }
        };
        if let Some(b) = self.rhs() {
            let rows = parsed.rows();
            if b.len() != rows {
                return Err(CliError::Schema(format!(
                    "right-hand side has length {} but the matrix has {rows} rows",
                    b.len()
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Schema("right-hand side is not finite".into()));
            }
        }
        Ok(parsed)
    }
}

fn schema_or_core(e: pinvcond_core::Error) -> CliError {
    if e.is_degenerate() {
        CliError::Core(e)
    } else {
        CliError::schema(e)
    }
}

impl Parsed {
    pub fn matrix(&self) -> Matrix {
        match self {
            Parsed::Cv(p) => pinvcond_core::cv::build_cv(p),
            Parsed::Qs(q) => q.matrix(),
            Parsed::Dense(m) => m.clone(),
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Parsed::Cv(p) => p.m(),
            Parsed::Qs(q) => q.n(),
            Parsed::Dense(m) => m.rows(),
        }
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
}

//! Output documents and their json/csv/table renderings.

use std::fmt::Write as _;

use pinvcond_core::oracle::{OracleEstimate, PerturbSpec};
use pinvcond_core::qs::Verdict;
use pinvcond_core::{CnReport, Kernel};
use serde::Serialize;

use crate::error::CliError;
use crate::input::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub timestamp: String,
}

impl Provenance {
    pub fn now(seed: Option<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceEcho {
    pub parameters: Instance,
    pub labels: Vec<String>,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub tol_used: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum KernelOut {
    Matrix(Vec<Vec<f64>>),
    Vector(Vec<f64>),
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportEntry {
    pub name: String,
    pub problem: &'static str,
    pub mode: &'static str,
    pub mixed: f64,
    pub componentwise: f64,
    pub rank: usize,
    pub tol_used: f64,
    pub kernel: KernelOut,
}

impl ReportEntry {
    pub fn new(name: &str, problem: &'static str, r: &CnReport) -> Self {
        let kernel = match &r.kernel {
            Kernel::Matrix(m) => KernelOut::Matrix((0..m.rows()).map(|i| m.row(i).to_vec()).collect()),
            Kernel::Vector(v) => KernelOut::Vector(v.clone()),
        };
        Self {
            name: name.to_string(),
            problem,
            mode: r.mode.as_str(),
            mixed: r.mixed,
            componentwise: r.componentwise,
            rank: r.rank,
            tol_used: r.tol_used,
            kernel,
        }
    }

    /// `(max norm, ∞ norm)` of the kernel; they coincide for vectors.
    pub fn kernel_norms(&self) -> (f64, f64) {
        match &self.kernel {
            KernelOut::Matrix(rows) => {
                let max = rows.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
                let inf = rows
                    .iter()
                    .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                    .fold(0.0_f64, f64::max);
                (max, inf)
            }
            KernelOut::Vector(v) => {
                let m = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
                (m, m)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleEntry {
    pub problem: &'static str,
    pub mode: &'static str,
    pub epsilon: f64,
    pub eps_ladder: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub mixed_lb: f64,
    pub componentwise_lb: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub inconclusive: bool,
    pub achiever: Option<Vec<f64>>,
}

impl OracleEntry {
    pub fn new(problem: &'static str, spec: &PerturbSpec, e: OracleEstimate) -> Self {
        Self {
            problem,
            mode: spec.mode.as_str(),
            epsilon: spec.epsilon,
            eps_ladder: spec.eps_ladder.clone(),
            trials: spec.trials,
            seed: spec.seed,
            mixed_lb: e.mixed_lb,
            componentwise_lb: e.componentwise_lb,
            accepted: e.accepted,
            rejected: e.rejected,
            inconclusive: e.inconclusive,
            achiever: e.achiever,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictEntry {
    pub name: &'static str,
    pub problem: &'static str,
    pub measure: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub factor: f64,
    pub margin: f64,
    pub pass: bool,
}

impl From<&Verdict> for VerdictEntry {
    fn from(v: &Verdict) -> Self {
        Self {
            name: v.name,
            problem: v.problem,
            measure: v.measure,
            lhs: v.lhs,
            rhs: v.rhs,
            factor: v.factor,
            margin: v.margin,
            pass: v.pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub command: &'static str,
    pub instance: InstanceEcho,
    pub reports: Vec<ReportEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<OracleEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<Vec<VerdictEntry>>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

pub fn to_json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes one CSV block with a header row.
pub fn csv_block(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// Left-aligned text table.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header.to_vec(), &mut out);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(rule.iter().map(|s| s.as_str()).collect(), &mut out);
    for r in rows {
        line(r.iter().map(|s| s.as_str()).collect(), &mut out);
    }
    out
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

const REPORT_HEADER: [&str; 9] = [
    "name",
    "problem",
    "mode",
    "mixed",
    "componentwise",
    "rank",
    "tol_used",
    "kernel_max_norm",
    "kernel_inf_norm",
];
const ORACLE_HEADER: [&str; 9] = [
    "problem",
    "mode",
    "epsilon",
    "trials",
    "seed",
    "mixed_lb",
    "componentwise_lb",
    "accepted",
    "rejected",
];
const VERDICT_HEADER: [&str; 8] =
    ["name", "problem", "measure", "lhs", "rhs", "factor", "margin", "pass"];

impl ReportDocument {
    fn report_rows(&self) -> Vec<Vec<String>> {
        self.reports
            .iter()
            .map(|r| {
                let (mx, inf) = r.kernel_norms();
                vec![
                    r.name.clone(),
                    r.problem.into(),
                    r.mode.into(),
                    num(r.mixed),
                    num(r.componentwise),
                    r.rank.to_string(),
                    num(r.tol_used),
                    num(mx),
                    num(inf),
                ]
            })
            .collect()
    }

    fn oracle_rows(&self) -> Option<Vec<Vec<String>>> {
        self.oracle.as_ref().map(|o| {
            o.iter()
                .map(|e| {
                    vec![
                        e.problem.into(),
                        e.mode.into(),
                        num(e.epsilon),
                        e.trials.to_string(),
                        e.seed.to_string(),
                        num(e.mixed_lb),
                        num(e.componentwise_lb),
                        e.accepted.to_string(),
                        e.rejected.to_string(),
                    ]
                })
                .collect()
        })
    }

    fn verdict_rows(&self) -> Option<Vec<Vec<String>>> {
        self.verdicts.as_ref().map(|vs| {
            vs.iter()
                .map(|v| {
                    vec![
                        v.name.into(),
                        v.problem.into(),
                        v.measure.into(),
                        num(v.lhs),
                        num(v.rhs),
                        num(v.factor),
                        num(v.margin),
                        v.pass.to_string(),
                    ]
                })
                .collect()
        })
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut out = csv_block(&REPORT_HEADER, &self.report_rows())?;
                if let Some(rows) = self.oracle_rows() {
                    out.push('\n');
                    out.push_str(&csv_block(&ORACLE_HEADER, &rows)?);
                }
                if let Some(rows) = self.verdict_rows() {
                    out.push('\n');
                    out.push_str(&csv_block(&VERDICT_HEADER, &rows)?);
                }
                Ok(out)
            }
            Format::Table => {
                let i = &self.instance;
                let mut out = format!(
                    "{} on {} instance: {}x{}, rank {}, tol {}\n\n",
                    self.command,
                    i.parameters.kind(),
                    i.rows,
                    i.cols,
                    i.rank,
                    num(i.tol_used)
                );
                out.push_str(&text_table(&REPORT_HEADER[..7], &self.report_rows()));
                if let Some(rows) = self.oracle_rows() {
                    out.push('\n');
                    out.push_str(&text_table(&ORACLE_HEADER, &rows));
                }
                if let Some(rows) = self.verdict_rows() {
                    out.push('\n');
                    out.push_str(&text_table(&VERDICT_HEADER, &rows));
                }
                for w in &self.warnings {
                    let _ = writeln!(out, "warning: {w}");
                }
                Ok(out)
            }
        }
    }
}


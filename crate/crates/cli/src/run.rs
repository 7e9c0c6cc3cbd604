//! Command dispatch.

use std::path::PathBuf;

use pinvcond_core::cv::{
    cv_ls_cn_exact_fullrank, cv_ls_cn_upper, cv_pinv_cn_exact_fullrank, cv_pinv_cn_upper,
};
use pinvcond_core::oracle::{estimate_ls_cn, estimate_pinv_cn, Mode, PerturbSpec, MAX_VERTEX_PARAMS};
use pinvcond_core::qs::{
    compare_all, gv_ls_cn_upper, gv_pinv_cn_upper, qs_effective_ls_cn, qs_effective_pinv_cn,
    qs_ls_cn_upper, qs_pinv_cn_upper, QsInstance,
};
use pinvcond_core::{
    entrywise_model, ls_cn_exact_fullrank, ls_cn_unstructured, pinv, pinv_cn_exact_fullrank,
    pinv_cn_unstructured, pinv_cn_upper, ls_cn_upper, CnReport, MatrixModel,
};

use crate::error::CliError;
use crate::input::{parse_instance, Instance, Parsed};
use crate::report::{
    Format, InstanceEcho, OracleEntry, Provenance, ReportDocument, ReportEntry, VerdictEntry,
};
use crate::reproduce::{reproduce, TableId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    CnPinv,
    CnLs,
    Oracle,
    Compare,
    Reproduce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleMode {
    SignVertices,
    MonteCarlo,
    Extrapolated,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub format: Format,
    pub rank_tol: Option<f64>,
    pub seed: Option<u64>,
    pub table: Option<TableId>,
    pub trials: Option<usize>,
    pub epsilon: Option<f64>,
    pub mode: Option<OracleMode>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            input: None,
            format: Format::Json,
            rank_tol: None,
            seed: None,
            table: None,
            trials: None,
            epsilon: None,
            mode: None,
        }
    }
}

/// Runs one command and returns the rendered document.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    if let Some(t) = cfg.rank_tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Schema("--rank-tol must be positive and finite".into()));
        }
    }
    if cfg.command == Command::Reproduce {
        let table = cfg
            .table
            .ok_or_else(|| CliError::Schema("reproduce requires --table".into()))?;
        return reproduce(table, cfg.seed.unwrap_or(0), cfg.rank_tol)?.render(cfg.format);
    }
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::Schema("--input is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let inst = parse_instance(&text)?;
    document(cfg, inst)?.render(cfg.format)
}

/// Builds the report document for an already parsed instance.
pub fn document(cfg: &RunConfig, inst: Instance) -> Result<ReportDocument, CliError> {
    let parsed = inst.parse()?;
    let rank_tol = cfg.rank_tol;
    let m = parsed.matrix();
    let bundle = pinv(&m, rank_tol)?;
    let (model, psi) = model_of(&parsed);
    let mut warnings = Vec::new();
    if let Parsed::Cv(p) = &parsed {
        for (i, j, gap) in p.near_collisions() {
            warnings.push(format!("c_{} and d_{} are within relative gap {gap}", i + 1, j + 1));
        }
    }
    let full_rank = bundle.rank == m.cols();
    let mut reports = Vec::new();
    let mut oracle = None;
    let mut verdicts = None;
    let mut seed = None;
    match cfg.command {
        Command::CnPinv => reports = pinv_reports(&parsed, &*model, &psi, full_rank, rank_tol)?,
        Command::CnLs => {
            let b = require_rhs(&inst)?;
            reports = ls_reports(&parsed, &*model, &psi, b, full_rank, rank_tol)?;
        }
        Command::Oracle => {
            let spec = oracle_spec(cfg, psi.len());
            seed = Some(spec.seed);
            spec.validate()?;
            let mut entries = vec![OracleEntry::new(
                "pinv",
                &spec,
                estimate_pinv_cn(&*model, &psi, &spec, rank_tol)?,
            )];
            reports.push(ReportEntry::new("upper_bound", "pinv", &pinv_cn_upper(&*model, &psi, rank_tol)?));
            if let Some(b) = inst.rhs() {
                entries.push(OracleEntry::new(
                    "ls",
                    &spec,
                    estimate_ls_cn(&*model, &psi, b, &spec, rank_tol)?,
                ));
                reports.push(ReportEntry::new("upper_bound", "ls", &ls_cn_upper(&*model, &psi, b, rank_tol)?));
            }
            for e in &entries {
                if e.inconclusive {
                    warnings.push(format!("{}: every perturbation was rejected", e.problem));
                }
            }
            oracle = Some(entries);
        }
        Command::Compare => {
            let Parsed::Qs(q) = &parsed else {
                return Err(CliError::Schema("compare needs a qs or gv instance".into()));
            };
            let c = compare_all(q, inst.rhs(), rank_tol)?;
            let mut push_set = |set: &pinvcond_core::qs::ReportSet, problem: &'static str| {
                if let Some(g) = &set.structured_gv {
                    reports.push(ReportEntry::new("structured_gv", problem, g));
                }
                reports.push(ReportEntry::new("structured_qs", problem, &set.structured_qs));
                reports.push(ReportEntry::new("effective", problem, &set.effective));
                reports.push(ReportEntry::new("unstructured", problem, &set.unstructured));
            };
            push_set(&c.pinv, "pinv");
            if let Some(ls) = &c.ls {
                push_set(ls, "ls");
            }
            verdicts = Some(c.verdicts.iter().map(VerdictEntry::from).collect());
        }
        Command::Reproduce => unreachable!("handled by run"),
    }
    let (rows, cols) = m.shape();
    Ok(ReportDocument {
        command: command_name(cfg.command),
        instance: InstanceEcho {
            parameters: inst,
            labels: model.labels(),
            rows,
            cols,
            rank: bundle.rank,
            tol_used: bundle.tol_used,
        },
        reports,
        oracle,
        verdicts,
        warnings,
        provenance: Provenance::now(seed.or(cfg.seed)),
    })
}

pub fn command_name(c: Command) -> &'static str {
    match c {
        Command::CnPinv => "cn-pinv",
        Command::CnLs => "cn-ls",
        Command::Oracle => "oracle",
        Command::Compare => "compare",
        Command::Reproduce => "reproduce",
    }
}

fn require_rhs(inst: &Instance) -> Result<&[f64], CliError> {
    inst.rhs().ok_or_else(|| {
        let key = if inst.kind() == "cv" { "b" } else { "b_rhs" };
        CliError::Schema(format!("cn-ls needs a right-hand side (\"{key}\")"))
    })
}

fn model_of(p: &Parsed) -> (Box<dyn MatrixModel>, Vec<f64>) {
    match p {
        Parsed::Cv(c) => (Box::new(c.model()), c.psi()),
        Parsed::Qs(QsInstance::Qs(q)) => (Box::new(q.model()), q.psi()),
        Parsed::Qs(QsInstance::Gv(g)) => (Box::new(g.model()), g.psi()),
        Parsed::Dense(m) => {
            let (model, psi) = entrywise_model(m);
            (Box::new(model), psi)
        }
    }
}

fn oracle_spec(cfg: &RunConfig, p: usize) -> PerturbSpec {
    let d = PerturbSpec::default();
    let mode = match cfg.mode {
        Some(OracleMode::SignVertices) => Mode::SignVertices,
        Some(OracleMode::MonteCarlo) => Mode::MonteCarlo,
        Some(OracleMode::Extrapolated) => Mode::Extrapolated,
        None if p <= MAX_VERTEX_PARAMS => Mode::SignVertices,
        None => Mode::MonteCarlo,
    };
    PerturbSpec {
        epsilon: cfg.epsilon.unwrap_or(d.epsilon),
        trials: cfg.trials.unwrap_or(d.trials),
        seed: cfg.seed.unwrap_or(d.seed),
        mode,
        eps_ladder: d.eps_ladder,
    }
}

fn push(out: &mut Vec<ReportEntry>, name: &str, problem: &'static str, r: CnReport) {
    out.push(ReportEntry::new(name, problem, &r));
}

fn pinv_reports(
    parsed: &Parsed,
    model: &dyn MatrixModel,
    psi: &[f64],
    full_rank: bool,
    tol: Option<f64>,
) -> Result<Vec<ReportEntry>, CliError> {
    let mut out = Vec::new();
    match parsed {
        Parsed::Cv(p) => {
            push(&mut out, "structured_cv", "pinv", cv_pinv_cn_upper(p, tol)?);
            if full_rank {
                push(&mut out, "structured_cv", "pinv", cv_pinv_cn_exact_fullrank(p, tol)?);
            }
        }
        Parsed::Qs(inst) => {
            let q = inst.qs_params();
            if let QsInstance::Gv(g) = inst {
                push(&mut out, "structured_gv", "pinv", gv_pinv_cn_upper(g, tol)?);
            }
            push(&mut out, "structured_qs", "pinv", qs_pinv_cn_upper(&q, tol)?);
            push(&mut out, "effective", "pinv", qs_effective_pinv_cn(&q, tol)?);
            if full_rank {
                let name = if matches!(inst, QsInstance::Gv(_)) { "structured_gv" } else { "structured_qs" };
                push(&mut out, name, "pinv", pinv_cn_exact_fullrank(model, psi, tol)?);
            }
        }
        Parsed::Dense(_) => {
            if full_rank {
                push(&mut out, "entrywise", "pinv", pinv_cn_exact_fullrank(model, psi, tol)?);
            }
        }
    }
    push(&mut out, "unstructured", "pinv", pinv_cn_unstructured(&parsed.matrix(), tol)?);
    Ok(out)
}

fn ls_reports(
    parsed: &Parsed,
    model: &dyn MatrixModel,
    psi: &[f64],
    b: &[f64],
    full_rank: bool,
    tol: Option<f64>,
) -> Result<Vec<ReportEntry>, CliError> {
    let mut out = Vec::new();
    match parsed {
        Parsed::Cv(p) => {
            push(&mut out, "structured_cv", "ls", cv_ls_cn_upper(p, b, tol)?);
            if full_rank {
                push(&mut out, "structured_cv", "ls", cv_ls_cn_exact_fullrank(p, b, tol)?);
            }
        }
        Parsed::Qs(inst) => {
            let q = inst.qs_params();
            if let QsInstance::Gv(g) = inst {
                push(&mut out, "structured_gv", "ls", gv_ls_cn_upper(g, b, tol)?);
            }
            push(&mut out, "structured_qs", "ls", qs_ls_cn_upper(&q, b, tol)?);
            push(&mut out, "effective", "ls", qs_effective_ls_cn(&q, b, tol)?);
            if full_rank {
                let name = if matches!(inst, QsInstance::Gv(_)) { "structured_gv" } else { "structured_qs" };
                push(&mut out, name, "ls", ls_cn_exact_fullrank(model, psi, b, tol)?);
            }
        }
        Parsed::Dense(_) => {
            if full_rank {
                push(&mut out, "entrywise", "ls", ls_cn_exact_fullrank(model, psi, b, tol)?);
            }
        }
    }
    push(&mut out, "unstructured", "ls", ls_cn_unstructured(&parsed.matrix(), b, tol)?);
    Ok(out)
}

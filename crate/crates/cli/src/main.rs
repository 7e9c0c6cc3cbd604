use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use pinvcond::error::{EXIT_OK, EXIT_SCHEMA};
use pinvcond::run::OracleMode;
use pinvcond::{run, Command, Format, RunConfig, TableId};

/// Structured condition numbers of Moore-Penrose inverses and minimum-norm
/// least-squares solutions.
///
/// Exit status: 0 success, 1 unreadable input, 2 degenerate instance,
/// 3 schema or usage error.
///
/// Tables for `reproduce`: t1, t2 (Cauchy-Vandermonde examples), t3, t4
/// (order-5 quasiseparable), t5 (unbalanced generators), t7, t8
/// (rank-deficient tangent corpora). There is no t6.
#[derive(Parser, Debug)]
#[command(name = "pinvcond", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON instance file (cv, qs, gv or dense)
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Absolute singular value cutoff; default max(m,n)·eps·σ_max
    #[arg(long)]
    rank_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    table: Option<TableId>,
    /// Monte-Carlo draws for `oracle`
    #[arg(long)]
    trials: Option<usize>,
    /// Relative perturbation size for `oracle`
    #[arg(long)]
    epsilon: Option<f64>,
    /// Oracle search; defaults to sign vertices up to 20 parameters
    #[arg(long, value_enum)]
    mode: Option<OracleMode>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_SCHEMA,
            };
            return ExitCode::from(code as u8);
        }
    };
    let cfg = RunConfig {
        command: cli.command,
        input: cli.input,
        format: cli.format,
        rank_tol: cli.rank_tol,
        seed: cli.seed,
        table: cli.table,
        trials: cli.trials,
        epsilon: cli.epsilon,
        mode: cli.mode,
    };
    match run(&cfg) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("pinvcond: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commutant::block_diagonalize_invertible;
use crate::diagonalize::block_diagonalize_unitary;
use crate::error::{Error, Result};
use crate::invariant::SearchConfig;
use crate::io::{parse_matrix_set, parse_report, report_to_json, report_to_text, write_report};
use crate::linalg::Tolerances;
use crate::triangularize::block_triangularize;
use crate::verify::validate_report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_DECOMPOSITION: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "simblock",
    version,
    about = "Simultaneous block triangularization and block diagonalization of matrix sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Unitary block upper triangularization.
    Triangularize(RunArgs),
    /// Unitary block diagonalization.
    DiagUnitary(RunArgs),
    /// Block diagonalization by an invertible matrix.
    DiagInvertible(RunArgs),
    /// Check a report against its input set.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct ToleranceArgs {
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long = "tol", default_value_t = Tolerances::default().rank_tol)]
    rank_tol: f64,
    /// Absolute bound on entries required to vanish.
    #[arg(long, default_value_t = Tolerances::default().residual_tol)]
    residual_tol: f64,
    /// Radius for merging nearby eigenvalues.
    #[arg(long, default_value_t = Tolerances::default().eig_cluster_tol)]
    eig_cluster_tol: f64,
}

impl ToleranceArgs {
    fn tolerances(&self) -> Result<Tolerances> {
        Tolerances::new(self.rank_tol, self.residual_tol, self.eig_cluster_tol)
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Input matrix-set JSON file.
    file: PathBuf,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random combinations tried.
    #[arg(long, default_value_t = SearchConfig::default().n_seed_combinations)]
    trials: usize,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Input matrix-set JSON file.
    file: PathBuf,
    /// Report JSON file to check.
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

/// Runs the CLI on the process streams.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_ERROR
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Triangularize(a) => run_algorithm(&a, out, block_triangularize),
        Command::DiagUnitary(a) => run_algorithm(&a, out, block_diagonalize_unitary),
        Command::DiagInvertible(a) => run_algorithm(&a, out, block_diagonalize_invertible),
        Command::Verify(a) => run_verify(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_no_decomposition() {
                let _ = writeln!(err, "no decomposition found");
                EXIT_NO_DECOMPOSITION
            } else {
                EXIT_ERROR
            }
        }
    }
}

type Algorithm = fn(
    &crate::matrix_set::MatrixSet,
    &SearchConfig,
    &Tolerances,
) -> Result<crate::report::DecompositionReport>;

fn run_algorithm(
    args: &RunArgs,
    out: &mut dyn Write,
    algorithm: Algorithm,
) -> Result<i32> {
    let tol = args.tol.tolerances()?;
    let cfg = SearchConfig {
        rng_seed: args.seed,
        n_seed_combinations: args.trials,
        ..SearchConfig::default()
    };
    let set = parse_matrix_set(&args.file)?;
    let report = algorithm(&set, &cfg, &tol)?;

    let outcome = validate_report(&set, &report, &tol);
    if !outcome.passed() {
        let reasons: Vec<String> = outcome.failures.iter().map(|f| f.to_string()).collect();
        return Err(Error::InvalidReport(reasons.join("; ")));
    }

    match &args.output {
        Some(path) => {
            write_report(&report, path)?;
            if args.format == Format::Text {
                out.write_all(report_to_text(&report).as_bytes())?;
            }
        }
        None => {
            let rendered = match args.format {
                Format::Json => report_to_json(&report),
                Format::Text => report_to_text(&report),
            };
            out.write_all(rendered.as_bytes())?;
        }
    }
    Ok(EXIT_OK)
}

fn run_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let tol = args.tol.tolerances()?;
    let set = parse_matrix_set(&args.file)?;
    let report = parse_report(&args.report, &set)?;
    let outcome = validate_report(&set, &report, &tol);
    match args.format {
        Format::Text => {
            if outcome.passed() {
                writeln!(out, "PASS")?;
            } else {
                for f in &outcome.failures {
                    writeln!(out, "FAIL: {f}")?;
                }
            }
        }
        Format::Json => {
            let value = serde_json::json!({
                "passed": outcome.passed(),
                "failures": outcome.failures.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                "residuals": outcome.residuals,
            });
            writeln!(out, "{value:#}")?;
        }
    }
    Ok(if outcome.passed() { EXIT_OK } else { EXIT_ERROR })
}

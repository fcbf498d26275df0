//! The `logdiv` command-line driver.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 domain or numerical
//! failure, 3 a check or suite exceeded its tolerance.

pub mod commands;
pub mod config;
pub mod output;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{Context, Failure, Output};
use config::{RunConfig, SuiteTolerances};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_MATH: i32 = 2;
pub const EXIT_SUITE: i32 = 3;

/// Seed used when neither `--seed` nor the config gives one.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Divergence, Bregman divergence, dual coordinates and Fenchel gap for point pairs.
    Eval,
    /// Alpha-conjugate values and the gradient-inverse roundtrip.
    Conjugate,
    /// Geodesic trace with h(t), both charts and an RK4 cross-check.
    Geodesic,
    /// Constant-curvature residuals.
    Curvature,
    /// Generalized Pythagorean relation on triples.
    Pythagoras,
    /// Rényi identities of a discrete family.
    Renyi,
    /// Reconstruction of the divergence from the connection.
    Reconstruct,
    /// All verification suites.
    Report,
}

#[derive(Debug, Parser)]
#[command(name = "logdiv", version, about = "Logarithmic divergences, their duality and geometry")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration (optional for `report`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance override; for `report` it replaces every suite tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

/// Result of a run before it is written out.
#[derive(Debug)]
pub struct Rendered {
    pub text: String,
    pub code: i32,
}

fn render(out: &Output, format: Format) -> String {
    match format {
        Format::Json => output::to_json(&out.json),
        Format::Csv => out.table.to_csv(),
    }
}

fn failure_code(f: &Failure) -> i32 {
    match f {
        Failure::Config(_) => EXIT_CONFIG,
        Failure::Math(_) => EXIT_MATH,
    }
}

/// Executes a parsed command line; errors carry their exit code.
pub fn execute(cli: &Cli) -> Result<Rendered, (i32, String)> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| (EXIT_CONFIG, e))?,
        None if cli.command == Command::Report => RunConfig::default(),
        None => return Err((EXIT_CONFIG, "--config is required for this command".into())),
    };
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err((EXIT_CONFIG, format!("--tol must be a nonnegative number, got {t}")));
        }
    }
    let seed = cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    if cli.command == Command::Report {
        let mut rc = config.report.clone().unwrap_or_default();
        if let Some(t) = cli.tol.or(config.tolerance) {
            rc.tolerances = SuiteTolerances::uniform(t);
        }
        report::validate(&rc).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
        log::info!("running report with seed {seed} and {} samples", rc.samples);
        let rep = report::run_report(&rc, seed);
        for s in rep.suites.iter().filter(|s| !s.passed) {
            log::warn!("suite {} failed: max residual {:e} > {:e}", s.name, s.max_residual, s.tolerance);
        }
        let text = match cli.format {
            Format::Json => output::to_json(&rep),
            Format::Csv => rep.table().to_csv(),
        };
        return Ok(Rendered { text, code: if rep.all_passed { EXIT_OK } else { EXIT_SUITE } });
    }
    let ctx = Context { config, seed, tol: cli.tol };
    let result = match cli.command {
        Command::Eval => commands::eval(&ctx),
        Command::Conjugate => commands::conjugate(&ctx),
        Command::Geodesic => commands::geodesic(&ctx),
        Command::Curvature => commands::curvature(&ctx),
        Command::Pythagoras => commands::pythagoras(&ctx),
        Command::Renyi => commands::renyi(&ctx),
        Command::Reconstruct => commands::reconstruct(&ctx),
        Command::Report => unreachable!("handled above"),
    };
    match result {
        Ok(out) => Ok(Rendered { text: render(&out, cli.format), code: if out.passed { EXIT_OK } else { EXIT_SUITE } }),
        Err(f) => Err((failure_code(&f), f.to_string())),
    }
}

/// Full CLI entry point: parses `args`, runs, writes output and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter("LOGDIV_LOG")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(r) => {
            let written = match &cli.out {
                Some(path) => {
                    std::fs::write(path, &r.text).map_err(|e| format!("cannot write {}: {e}", path.display()))
                }
                None => std::io::stdout().write_all(r.text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => r.code,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    EXIT_CONFIG
                }
            }
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

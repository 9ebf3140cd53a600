//! Command-line front end.
//!
//! Exit codes: `check` reports 0/1/2 for coexistent, not coexistent and
//! indeterminate. Bad arguments or invalid input data give 64, unreadable or
//! unparsable files 66, and internal failures 70.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::coexistence::{decide, mn_to_efg, SolverConfig, Verdict};
use crate::config::{CERT_TOL, STRATUM_TOL};
use crate::error::Error;
use crate::harness::{run_all, write_report, HarnessConfig, Suite};
use crate::io::{read_document, read_effect, to_precise_json, write_document, MatrixDocument};
use crate::preservers::PreserverSpec;
use crate::reconstruction::{reconstruct, verify_reconstruction};
use crate::strata::{classify, freedom_dimension};

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_FILE: i32 = 66;
pub const EXIT_INTERNAL: i32 = 70;

/// Random effects used by `reconstruct` to verify a fitted map.
const VERIFY_TRIALS: usize = 50;
/// Default probe tolerance for `reconstruct`.
const DEFAULT_FIT_TOL: f64 = 1e-6;
/// Verification residual up to which a fitted map counts as standard.
const STANDARD_TOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(name = "coexist", version, about = "Coexistence of quantum effects and the maps that preserve it")]
struct Cli {
    /// Master seed for everything randomized.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance override: solver feasibility for `check` and `harness`,
    /// eigenvalue snapping for `stratify`, probe fit for `reconstruct`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether two effects coexist.
    Check {
        a: PathBuf,
        b: PathBuf,
        /// Write the (M, N, E, F, G) certificate when one is found.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Print the stratum (p, q) of an effect.
    Stratify { a: PathBuf },
    /// Apply a preserver to an effect.
    Apply {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PreserverSpec::NAMES))]
        map: String,
        #[arg(long)]
        spec: PathBuf,
        a: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a standard automorphism to a map.
    Reconstruct {
        #[arg(long)]
        map_spec: PathBuf,
        #[arg(long)]
        dim: usize,
        /// Where to write U; printed after the summary when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property campaigns.
    Harness {
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        suites: Option<Vec<String>>,
        #[arg(long)]
        feas_tol: Option<f64>,
        #[arg(long)]
        sep_tol: Option<f64>,
        #[arg(long)]
        max_cycles: Option<usize>,
        /// Report path; the report goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Parse(_) => EXIT_FILE,
            Error::EigenNoConvergence { .. } | Error::InvalidCertificate { .. } | Error::EmptyBlockList => EXIT_INTERNAL,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Failure::usage(format!("--tol must be positive, got {t}")));
        }
    }
    match cli.command {
        Command::Check { a, b, cert } => check(&a, &b, cert.as_deref(), cli.tol),
        Command::Stratify { a } => stratify(&a, cli.tol),
        Command::Apply { map, spec, a, out } => apply(&map, &spec, &a, out.as_deref()),
        Command::Reconstruct { map_spec, dim, out } => reconstruct_cmd(&map_spec, dim, out.as_deref(), cli.tol, cli.seed),
        Command::Harness { dims, trials, suites, feas_tol, sep_tol, max_cycles, out } => {
            let mut cfg = HarnessConfig { seed: cli.seed, ..HarnessConfig::default() };
            if let Some(d) = dims {
                cfg.dims = d;
            }
            if let Some(t) = trials {
                cfg.trials_per_suite = t;
            }
            if let Some(names) = suites {
                cfg.suites = names.iter().map(|s| s.parse::<Suite>()).collect::<Result<_, _>>()?;
            }
            cfg.solver = solver_config(feas_tol.or(cli.tol), sep_tol, max_cycles);
            harness(&cfg, out.as_deref())
        }
    }
}

fn solver_config(feas_tol: Option<f64>, sep_tol: Option<f64>, max_cycles: Option<usize>) -> SolverConfig {
    let d = SolverConfig::default();
    SolverConfig {
        feas_tol: feas_tol.unwrap_or(d.feas_tol),
        sep_tol: sep_tol.unwrap_or(d.sep_tol),
        max_cycles: max_cycles.unwrap_or(d.max_cycles),
        stall_window: d.stall_window,
    }
}

#[derive(Serialize)]
struct CertificateDocument {
    m: MatrixDocument,
    n: MatrixDocument,
    e: MatrixDocument,
    f: MatrixDocument,
    g: MatrixDocument,
}

fn check(a: &Path, b: &Path, cert: Option<&Path>, tol: Option<f64>) -> Outcome {
    let (a, b) = (read_effect(a)?, read_effect(b)?);
    let cfg = solver_config(tol, None, None);
    cfg.validate()?;
    let v = decide(&a, &b, &cfg)?;
    println!("verdict: {:?}", v.verdict);
    println!("reason: {:?}", v.reason);
    println!("residual: {:e}", v.residual);
    println!("iterations: {}", v.iterations);
    if let Some(path) = cert {
        match &v.witness {
            Some(w) => {
                let (e, f, g) = mn_to_efg(&w.m, &w.n, &a, &b)?;
                let doc = CertificateDocument {
                    m: MatrixDocument::from_hermitian(&w.m),
                    n: MatrixDocument::from_hermitian(&w.n),
                    e: MatrixDocument::from_hermitian(&e),
                    f: MatrixDocument::from_hermitian(&f),
                    g: MatrixDocument::from_hermitian(&g),
                };
                write_document(path, &doc)?;
                println!("certificate: {} (verified at {CERT_TOL:e})", path.display());
            }
            None => eprintln!("no certificate to write for a {:?} verdict", v.verdict),
        }
    }
    Ok(match v.verdict {
        Verdict::Coexistent => 0,
        Verdict::NotCoexistent => 1,
        Verdict::Indeterminate => 2,
    })
}

fn stratify(a: &Path, tol: Option<f64>) -> Outcome {
    let a = read_effect(a)?;
    let label = classify(&a, tol.unwrap_or(STRATUM_TOL))?;
    println!("p: {}", label.p);
    println!("q: {}", label.q);
    println!("freedom_dimension: {}", freedom_dimension(a.dim(), label.p, label.q)?);
    Ok(0)
}

/// Reads a spec file, filling in the `"map"` tag when it is missing.
fn read_spec(path: &Path, map: Option<&str>) -> std::result::Result<PreserverSpec, Failure> {
    let mut value: serde_json::Value = read_document(path)?;
    let object = value
        .as_object_mut()
        .ok_or_else(|| Failure { code: EXIT_FILE, message: format!("{}: spec must be a JSON object", path.display()) })?;
    match (object.get("map").and_then(|m| m.as_str()), map) {
        (Some(found), Some(wanted)) if found != wanted => {
            return Err(Failure::usage(format!("spec file describes `{found}` but --map is `{wanted}`")));
        }
        (None, Some(wanted)) => {
            object.insert("map".into(), wanted.into());
        }
        (None, None) => return Err(Failure::usage("spec file needs a \"map\" field")),
        _ => {}
    }
    serde_json::from_value(value).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(doc: &T, out: Option<&Path>) -> std::result::Result<(), Failure> {
    match out {
        Some(path) => write_document(path, doc)?,
        None => {
            std::io::stdout().write_all(to_precise_json(doc)?.as_bytes()).map_err(Error::from)?;
        }
    }
    Ok(())
}

fn apply(map: &str, spec: &Path, a: &Path, out: Option<&Path>) -> Outcome {
    let spec = read_spec(spec, Some(map))?;
    let a = read_effect(a)?;
    let image = spec.apply(&a)?;
    emit(&MatrixDocument::from_effect(&image), out)?;
    Ok(0)
}

fn reconstruct_cmd(spec: &Path, dim: usize, out: Option<&Path>, tol: Option<f64>, seed: u64) -> Outcome {
    let spec = read_spec(spec, None)?;
    if spec.dim() != dim {
        return Err(Failure::usage(format!("--dim {dim} does not match the spec dimension {}", spec.dim())));
    }
    let fit = match reconstruct(&spec, tol.unwrap_or(DEFAULT_FIT_TOL)) {
        Ok(fit) => fit,
        Err(e @ (Error::InconsistentMap { .. }
        | Error::NonProjectionImage { .. }
        | Error::NonOrthogonalImages { .. }
        | Error::PhaseFitFailure(_))) => {
            println!("standard: false");
            println!("reason: {e}");
            return Ok(1);
        }
        Err(e) => return Err(e.into()),
    };
    let verification = verify_reconstruction(&spec, &fit, VERIFY_TRIALS, seed)?;
    println!("standard: {}", verification <= STANDARD_TOL);
    println!("antiunitary: {}", fit.antiunitary);
    println!("perp: {}", fit.perp);
    println!("residual: {:e}", fit.residual);
    println!("verification_residual: {verification:e}");
    emit(&MatrixDocument::from_matrix(fit.u.matrix(), Some("unitary")), out)?;
    Ok(0)
}

fn harness(cfg: &HarnessConfig, out: Option<&Path>) -> Outcome {
    cfg.validate()?;
    let report = run_all(cfg)?;
    for s in &report.suites {
        eprintln!(
            "{:<18} pass {:>6}  fail {:>4}  indeterminate {:>4}  max residual {:.3e}  {:.2}s",
            s.suite.name(),
            s.pass,
            s.fail,
            s.indeterminate,
            s.max_residual,
            s.wall_time_seconds
        );
    }
    match out {
        Some(path) => write_report(&report, path)?,
        None => emit(&report, None)?,
    }
    Ok(if report.suites.iter().any(|s| s.fail > 0) { 1 } else { 0 })
}

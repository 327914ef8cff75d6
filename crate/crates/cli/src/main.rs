//! `commutant-lab`: spectra, verdicts, orbits, certificates and property
//! suites for commutator maps, with JSON reports.

mod commands;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commutant_core::certificate::LeadingExponent;
use commutant_core::linalg::{Complex, NormKind};
use commutant_core::maps::DEFAULT_WINDOW_CAP;
use commutant_core::LabError;

/// Exit codes. These are a stable contract.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const UNKNOWN_SPECTRUM: u8 = 3;
    pub const WINDOW_OVERFLOW: u8 = 4;
    pub const IDENTITY_VIOLATION: u8 = 5;
    pub const NEAR_APPROACH: u8 = 6;
}

const THREADS_VAR: &str = "COMMUTANT_LAB_THREADS";

#[derive(Parser)]
#[command(
    name = "commutant-lab",
    version,
    about = "Commutator maps on operator ideals: spectra, orbits and certificates",
    after_help = "Exit codes: 0 ok, 1 verify failure, 2 bad input or precondition, 3 unknown spectrum, \
                  4 window cap exceeded, 5 certificate identity violation, 6 near approach observed.\n\
                  COMMUTANT_LAB_THREADS caps the worker pool (0 or unset = one per core)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum of an operator and, for its commutator map, the difference set,
    /// the component test and the verdict.
    Spectrum(SpectrumArgs),
    /// Exact orbit of a matrix under an elementary map, with distances to targets.
    Orbit(OrbitArgs),
    /// Series certificate along the orbit of Delta_{cB} or Delta_{p(B)}.
    Certify(CertifyArgs),
    /// Run the built-in property suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MapChoice {
    Commutator,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum NormChoice {
    Op,
    Hs,
    Nuclear,
}

impl From<NormChoice> for NormKind {
    fn from(n: NormChoice) -> Self {
        match n {
            NormChoice::Op => NormKind::Operator,
            NormChoice::Hs => NormKind::HilbertSchmidt,
            NormChoice::Nuclear => NormKind::Nuclear,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    CsvSummary,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ExponentChoice {
    /// `c_m^n` at step n
    Iterations,
    /// `c_m^m` at every step
    Degree,
}

impl From<ExponentChoice> for LeadingExponent {
    fn from(e: ExponentChoice) -> Self {
        match e {
            ExponentChoice::Iterations => LeadingExponent::Iterations,
            ExponentChoice::Degree => LeadingExponent::Degree,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Matr,
    Tau,
    Normal,
    Paranormal,
    Hc,
    Spectral,
}

#[derive(Args)]
pub struct SpectrumArgs {
    /// Operator spec (JSON)
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value = "commutator")]
    pub map: MapChoice,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct OrbitArgs {
    /// Elementary map (JSON)
    pub map: PathBuf,
    /// Initial matrix (JSON)
    pub init: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub steps: usize,
    /// `eIeJ` for a matrix unit (e.g. e1e1) or a matrix file; repeatable
    #[arg(long = "target", default_value = "e1e1")]
    pub targets: Vec<String>,
    #[arg(long, value_enum, default_value = "op")]
    pub norm: NormChoice,
    /// Largest number of rows or columns the orbit window may reach
    #[arg(long, default_value_t = DEFAULT_WINDOW_CAP)]
    pub cap: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
pub struct RandomCorpus {
    pub seed: u64,
    pub size: usize,
    pub decay: f64,
}

#[derive(Args)]
pub struct CertifyArgs {
    /// Initial matrix (JSON); alternatively use --random
    #[arg(required_unless_present = "random", conflicts_with = "random")]
    pub matrix: Option<PathBuf>,
    /// Seeded random compact corpus: SEED,SIZE,DECAY
    #[arg(long, value_parser = parse_random, allow_hyphen_values = true)]
    pub random: Option<RandomCorpus>,
    /// Multiplier c of the backward shift: RE,IM
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, conflicts_with = "poly")]
    pub c: Option<Complex>,
    /// Polynomial coefficients c0,...,cm; each is RE or RE:IM
    #[arg(long, value_parser = parse_poly, allow_hyphen_values = true)]
    pub poly: Option<Poly>,
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[arg(long = "n-max", default_value_t = 24)]
    pub n_max: usize,
    /// Power of the leading coefficient in the polynomial identity
    #[arg(long, value_enum, default_value = "iterations")]
    pub exponent: ExponentChoice,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct Poly(pub Vec<Complex>);

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Matrix size used by the entrywise and normal suites
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    /// Also write the summary as JSON
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !x.is_finite() {
        return Err(format!("not finite: {s:?}"));
    }
    Ok(x)
}

fn parse_complex(s: &str) -> Result<Complex, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [re] => Ok(Complex::new(parse_f64(re)?, 0.0)),
        [re, im] => Ok(Complex::new(parse_f64(re)?, parse_f64(im)?)),
        _ => Err(format!("expected RE or RE,IM, got {s:?}")),
    }
}

fn parse_poly(s: &str) -> Result<Poly, String> {
    s.split(',')
        .map(|tok| match tok.split_once(':') {
            Some((re, im)) => Ok(Complex::new(parse_f64(re)?, parse_f64(im)?)),
            None => Ok(Complex::new(parse_f64(tok)?, 0.0)),
        })
        .collect::<Result<_, _>>()
        .map(Poly)
}

fn parse_random(s: &str) -> Result<RandomCorpus, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [seed, size, decay] = parts.as_slice() else {
        return Err(format!("expected SEED,SIZE,DECAY, got {s:?}"));
    };
    Ok(RandomCorpus {
        seed: seed.trim().parse().map_err(|_| format!("bad seed {seed:?}"))?,
        size: size.trim().parse().map_err(|_| format!("bad size {size:?}"))?,
        decay: parse_f64(decay)?,
    })
}

/// Why a command stopped early.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lab(LabError),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        Failure::Lab(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => exit::USAGE,
            Failure::Lab(LabError::WindowOverflow { .. }) => exit::WINDOW_OVERFLOW,
            Failure::Lab(LabError::ConvergenceFailure(_)) => exit::FAILED,
            Failure::Lab(_) => exit::USAGE,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Lab(e) => write!(f, "{e}"),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Writes to `out` if given, else to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn to_json_text<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("{THREADS_VAR} must be a nonnegative integer, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Orbit(a) => commands::orbit(a),
        Command::Certify(a) => commands::certify(a),
        Command::Verify(a) => suites::verify(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

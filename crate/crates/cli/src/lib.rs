//! Command-line runner for the fwl-core experiments.
//!
//! Exit codes: 0 success, 1 verification or numerical failure, 2 usage or
//! configuration error.

pub mod output;
pub mod suites;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fwl_core::scalar_field::{
    energy_density_t00, geometric_grid, strict_profile, strict_radial_derivative, strict_radial_phi, weak_profile,
    RadialProblem,
};
use fwl_core::two_field::{superposition_defect, Mode, PulseSetup};
use fwl_core::variational::{solve_stationary, uniform_grid, ActionProblem, StrictRadial, Weight};
use fwl_core::vector_field::{blended_h, lorenz_gauge_residual, maxwell_residual, scalar_la, Blend};
use fwl_core::{field::catalog, rng, Error, Sign};
use serde_json::json;

use output::{emit, json_string, Cell, Format, Table};
use suites::{Fault, Sampling, SuiteResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "FWL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fwl", version, about = "Weak-field Finsler geometry experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every identity suite and report the worst residual of each.
    Verify(VerifyArgs),
    /// Weak and strict static radial profiles as CSV.
    Radial(RadialArgs),
    /// Superposition defect of colliding pulses against amplitude.
    Twofield(TwoFieldArgs),
    /// Residual summary of the H4 identities.
    H4(H4Args),
    /// Solve the strict radial problem as a discrete stationary action.
    SolveRadial(SolveRadialArgs),
    /// Maxwell and Lorenz residuals of the built-in covector families.
    Maxwell(MaxwellArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Upper,
    Lower,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Sign {
        match s {
            SignArg::Upper => Sign::Plus,
            SignArg::Lower => Sign::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Linear,
    Strict,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Linear => Mode::Linear,
            ModeArg::Strict => Mode::Strict,
        }
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|e| format!("seed must be hexadecimal: {e}"))
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Hexadecimal seed.
    #[arg(long, value_parser = parse_seed, default_value = "5EED")]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Clone, Args)]
pub struct RadialArgs {
    #[arg(long, value_enum, default_value = "upper")]
    pub sign: SignArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rmin: f64,
    #[arg(long, default_value_t = 100.0)]
    pub rmax: f64,
    #[arg(long, default_value_t = 512)]
    pub nodes: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TwoFieldArgs {
    /// Largest amplitude; the next rows halve it twice.
    #[arg(long, default_value_t = 0.2)]
    pub amp: f64,
    /// Number of spatial cells.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct H4Args {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, value_parser = parse_seed, default_value = "5EED")]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SolveRadialArgs {
    #[arg(long, value_enum, default_value = "upper")]
    pub sign: SignArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rmin: f64,
    #[arg(long, default_value_t = 10.0)]
    pub rmax: f64,
    #[arg(long, default_value_t = 2000)]
    pub nodes: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MaxwellArgs {
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, value_parser = parse_seed, default_value = "5EED")]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::SingularShell { .. } | Error::Domain(_) | Error::CflViolation { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failure(other.to_string()),
        }
    }
}

type CliResult = Result<i32, CliError>;

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A pool already built by an earlier call in this process is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match configure_threads().and_then(|_| dispatch(&cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fwl: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cmd: &Command) -> CliResult {
    match cmd {
        Command::Verify(a) => verify(a),
        Command::Radial(a) => radial(a),
        Command::Twofield(a) => twofield(a),
        Command::H4(a) => h4(a),
        Command::SolveRadial(a) => solve_radial(a),
        Command::Maxwell(a) => maxwell(a),
    }
}

fn suite_table(results: &[SuiteResult]) -> Table {
    let mut t = Table::new(vec!["suite", "residual", "threshold", "pass"]);
    for r in results {
        t.push(vec![r.suite.into(), r.residual.into(), r.threshold.into(), r.pass.into()]);
    }
    t
}

fn verify(a: &VerifyArgs) -> CliResult {
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let results = suites::verify_all(
        Sampling {
            seed: a.seed,
            samples: a.samples,
        },
        a.inject_fault,
    );
    let text = match a.output.format {
        Some(f) => suite_table(&results).render(f),
        None => results
            .iter()
            .map(|r| {
                format!(
                    "{} {} residual={:e} threshold={:e}\n",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.suite,
                    r.residual,
                    r.threshold
                )
            })
            .collect(),
    };
    emit(&text, a.output.out.as_deref())?;
    let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.suite).collect();
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("fwl: failed suites: {}", failed.join(", "));
        Ok(EXIT_FAILURE)
    }
}

fn radial(a: &RadialArgs) -> CliResult {
    let p = RadialProblem::new(a.sign.into(), 0.0, a.c1, a.rmin, a.rmax)?;
    if p.r_min <= 0.0 {
        return Err(CliError::Usage("--rmin must be positive".into()));
    }
    let grid = geometric_grid(a.rmin, a.rmax, a.nodes)?;
    let weak = weak_profile(&p, &grid)?;
    let strict = strict_profile(&p, &grid)?;
    let mut t = Table::new(vec!["r", "phi_weak", "dphi_weak", "phi_strict", "dphi_strict", "t00"]);
    for (w, s) in weak.samples.iter().zip(&strict.samples) {
        t.push(vec![
            w.r.into(),
            w.phi.into(),
            w.dphi.into(),
            s.phi.into(),
            s.dphi.into(),
            energy_density_t00(&p, s.r)?.into(),
        ]);
    }
    emit(&t.render(a.output.format.unwrap_or(Format::Csv)), a.output.out.as_deref())?;
    Ok(EXIT_OK)
}

fn twofield(a: &TwoFieldArgs) -> CliResult {
    if !(a.amp.is_finite() && a.amp >= 0.0) {
        return Err(CliError::Usage("--amp must be finite and >= 0".into()));
    }
    if a.grid < 3 {
        return Err(CliError::Usage("--grid needs at least 3 cells".into()));
    }
    let setup = PulseSetup {
        cells: a.grid,
        ..PulseSetup::default()
    };
    let mut t = Table::new(vec!["amplitude", "defect"]);
    for k in 0..3 {
        let amp = a.amp / f64::from(1u32 << k);
        let (x, y) = setup.colliding_pulses(amp)?;
        let d = superposition_defect(&x, &y, a.steps, a.mode.into())?;
        t.push(vec![amp.into(), d.into()]);
    }
    emit(&t.render(a.output.format.unwrap_or(Format::Csv)), a.output.out.as_deref())?;
    Ok(EXIT_OK)
}

fn h4(a: &H4Args) -> CliResult {
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let r = suites::h4_residuals(Sampling {
        seed: a.seed,
        samples: a.samples,
    });
    let results = r.suites();
    let pass = results.iter().all(|s| s.pass);
    let text = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => json_string(&json!({
            "samples": a.samples,
            "seed": format!("{:#X}", a.seed),
            "timelike": r.timelike,
            "families": results,
            "pass": pass,
        })),
        Format::Csv => suite_table(&results).to_csv(),
    };
    emit(&text, a.output.out.as_deref())?;
    Ok(if pass { EXIT_OK } else { EXIT_FAILURE })
}

fn solve_radial(a: &SolveRadialArgs) -> CliResult {
    let sign: Sign = a.sign.into();
    let p = RadialProblem::new(sign, 0.0, a.c1, a.rmin, a.rmax)?;
    let grid = uniform_grid(a.rmin, a.rmax, a.nodes)?;
    let ends = (strict_radial_phi(&p, a.rmin)?, strict_radial_phi(&p, a.rmax)?);
    let problem = ActionProblem::new(grid.clone(), StrictRadial { sign }, ends.0, ends.1, Weight::RadialSquared)?;
    let sol = solve_stationary(&problem, &problem.linear_guess())?;
    let mut t = Table::new(vec!["r", "phi_discrete", "phi_strict", "slope_discrete", "dphi_strict_mid"]);
    for (k, r) in grid.iter().enumerate() {
        let (slope, exact) = if k + 1 < grid.len() {
            let s = (sol.phi[k + 1] - sol.phi[k]) / (grid[k + 1] - r);
            (Cell::Num(s), Cell::Num(strict_radial_derivative(&p, 0.5 * (r + grid[k + 1]))?))
        } else {
            (Cell::Text(String::new()), Cell::Text(String::new()))
        };
        t.push(vec![(*r).into(), sol.phi[k].into(), strict_radial_phi(&p, *r)?.into(), slope, exact]);
    }
    emit(&t.render(a.output.format.unwrap_or(Format::Csv)), a.output.out.as_deref())?;
    eprintln!("fwl: converged in {} iterations, gradient {:e}", sol.iterations, sol.gradient_norm);
    Ok(EXIT_OK)
}

fn maxwell(a: &MaxwellArgs) -> CliResult {
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let points = rng::points(a.seed, 20, a.samples);
    let mut t = Table::new(vec!["field", "maxwell_residual", "lorenz_residual", "trace_defect"]);
    for f in catalog::covector_families() {
        let (mut m, mut l, mut tr) = (0.0f64, 0.0f64, 0.0f64);
        for x in &points {
            m = maxwell_residual(&f, x).iter().fold(m, |acc, v| acc.max(v.abs()));
            l = l.max(lorenz_gauge_residual(&f, x).abs());
            let la = scalar_la(&f, x).value();
            for chi in [0.0, 0.5, 1.0] {
                tr = tr.max((blended_h(&f, &Blend::Constant(chi), x).eta_trace() - la).abs());
            }
        }
        t.push(vec![f.label.clone().into(), m.into(), l.into(), tr.into()]);
    }
    emit(&t.render(a.output.format.unwrap_or(Format::Csv)), a.output.out.as_deref())?;
    Ok(EXIT_OK)
}

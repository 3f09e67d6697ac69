//! The `lcdiff` command line.
//!
//! Exit codes: 0 when the requested check passes, 1 when a verification
//! fails or a computation breaks down, 2 on usage errors.

use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dist::{discretize, GridDensity, Law};
use crate::error::{Error, Result};
use crate::json;
use crate::mc::{ks_statistic, sample, Generator};
use crate::report::{verify_theorem, VerifyConfig};
use crate::shape::{check_log_concavity_grid, check_log_convexity_interval, check_ratio_monotonicity};
use crate::specfun::bessel_k0;
use crate::transform::{
    mgf_difference_closed_form, mgf_product_closed_form, mgf_via_conditioning, mgf_via_density,
    self_difference, self_difference_quadrature, MgfMethod, MgfValue,
};

#[derive(Debug, Parser)]
#[command(name = "lcdiff", version, about = "Log-concavity checks for X1X2 and X1X2 - X3X4")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full verification pipeline and print its report.
    VerifyTheorem(VerifyArgs),
    /// Write a built-in density on the midpoint grid.
    Density(DensityArgs),
    /// Write the density of X - X' for X drawn from a grid or a built-in law.
    Selfdiff(SelfdiffArgs),
    /// Evaluate moment generating functions on a list of arguments.
    Mgf(MgfArgs),
    /// Check a shape property and write the verdict.
    Shape(ShapeArgs),
    /// Draw a seeded sample, optionally with a KS test.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 12.0)]
    pub half_width: f64,
    #[arg(long, alias = "n-cells", default_value_t = 4096)]
    pub cells: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_shape: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_mgf: f64,
    /// Add the Monte Carlo step over the golden seed table.
    #[arg(long)]
    pub with_mc: bool,
    /// Sample size per seed for --with-mc.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long, value_parser = parse_law)]
    pub law: Law,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelfdiffMethod {
    /// Node-by-node quadrature of the convolution integral (built-in laws only).
    Quadrature,
    /// FFT cross-correlation of the grid.
    Fft,
}

#[derive(Debug, Args)]
pub struct SelfdiffArgs {
    #[arg(long, value_parser = parse_law, conflicts_with = "input")]
    pub law: Option<Law>,
    /// Grid density file (CSV or JSON); `-` reads standard input.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Defaults to quadrature for a built-in law, FFT for an input grid.
    #[arg(long, value_enum)]
    pub method: Option<SelfdiffMethod>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MgfArgs {
    #[arg(long, value_parser = parse_law, default_value = "normal-product")]
    pub law: Law,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_mgf: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Property {
    /// Midpoint concavity of ln f on a grid density.
    LogConcave,
    /// Midpoint convexity of ln K0 on [a, b].
    LogConvex,
    /// K0'/K0 strictly increasing on [a, b].
    RatioIncreasing,
}

#[derive(Debug, Args)]
pub struct ShapeArgs {
    #[arg(long, value_enum)]
    pub property: Property,
    /// Grid density file for log-concave; `-` or absent reads standard input.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_shape: f64,
    #[arg(long, default_value_t = 0.01)]
    pub a: f64,
    #[arg(long, default_value_t = 30.0)]
    pub b: f64,
    #[arg(long, default_value_t = 2048)]
    pub probes: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_parser = parse_generator, default_value = "product-self-difference")]
    pub generator: Generator,
    #[arg(long, value_parser = parse_seed)]
    pub seed: u64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also run a KS test against this law and write the report here.
    #[arg(long)]
    pub ks_out: Option<PathBuf>,
    #[arg(long, value_parser = parse_law, default_value = "laplace")]
    pub ks_law: Law,
    #[arg(long, default_value_t = 0.001)]
    pub alpha: f64,
}

fn parse_law(s: &str) -> std::result::Result<Law, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_generator(s: &str) -> std::result::Result<Generator, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("bad seed `{s}`: {e}"))
}

/// Error raised by a command; carries the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGrid(_)
            | Error::Domain { .. }
            | Error::Divergence { .. }
            | Error::Parse(_)
            | Error::Io(_)
            | Error::EmptyBatch
            | Error::NotNormalized { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Verification(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<bool, Failure>;

#[derive(Serialize, Deserialize)]
struct GridJson {
    half_width: f64,
    values: Vec<f64>,
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, or to standard output when `path` is `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        None => {
            let mut out = io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(contents.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        }
    }
    Ok(())
}

fn grid_to_string(g: &GridDensity, format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(g.to_csv_string()),
        Format::Json => json::to_string(&GridJson {
            half_width: g.half_width(),
            values: g.values().to_vec(),
        }),
    }
}

/// Parses a grid density written by `density` or `selfdiff`, in either format.
pub fn read_grid(text: &str) -> Result<GridDensity> {
    if text.trim_start().starts_with('{') {
        let g: GridJson = serde_json::from_str(text)?;
        GridDensity::new(g.half_width, g.values)
    } else {
        GridDensity::read_csv(BufReader::new(text.as_bytes()))
    }
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p != Path::new("-") => Ok(fs::read_to_string(p)?),
        _ => {
            let mut s = String::new();
            io::stdin().lock().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn check_positive(name: &str, v: f64) -> std::result::Result<(), Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--{name} must be a positive number, got {v}")))
    }
}

fn check_grid_args(g: &GridArgs) -> std::result::Result<(), Failure> {
    check_positive("half-width", g.half_width)?;
    if g.cells < 64 || !g.cells.is_multiple_of(2) {
        return Err(Failure::Usage(format!(
            "--cells must be even and at least 64, got {}",
            g.cells
        )));
    }
    Ok(())
}

fn cmd_verify_theorem(a: &VerifyArgs) -> CmdResult {
    check_grid_args(&a.grid)?;
    check_positive("tol-shape", a.tol_shape)?;
    check_positive("tol-mgf", a.tol_mgf)?;
    if a.n == 0 {
        return Err(Failure::Usage("--n must be positive".into()));
    }
    let report = verify_theorem(&VerifyConfig {
        half_width: a.grid.half_width,
        n_cells: a.grid.cells,
        tol_shape: a.tol_shape,
        tol_mgf: a.tol_mgf,
        with_mc: a.with_mc,
        mc_samples: a.n,
    });
    write_output(a.out.as_deref(), &json::to_string(&report)?)?;
    if let Some(step) = report.first_failure() {
        eprintln!("verification failed at step `{}`", step.step_name);
    }
    Ok(report.passed())
}

fn cmd_density(a: &DensityArgs) -> CmdResult {
    check_grid_args(&a.grid)?;
    let g = discretize(&a.law.density(), a.grid.half_width, a.grid.cells)?;
    write_output(a.out.as_deref(), &grid_to_string(&g, a.format)?)?;
    Ok(true)
}

fn cmd_selfdiff(a: &SelfdiffArgs) -> CmdResult {
    let d = match (a.law, &a.input) {
        (Some(law), None) => {
            check_grid_args(&a.grid)?;
            match a.method.unwrap_or(SelfdiffMethod::Quadrature) {
                SelfdiffMethod::Quadrature => self_difference_quadrature(
                    &law.density(),
                    a.grid.half_width,
                    a.grid.cells,
                    crate::report::SELF_DIFFERENCE_QUAD_TOL,
                )?,
                SelfdiffMethod::Fft => self_difference(&discretize(
                    &law.density(),
                    a.grid.half_width,
                    a.grid.cells,
                )?)?,
            }
        }
        (None, Some(path)) => {
            if a.method == Some(SelfdiffMethod::Quadrature) {
                return Err(Failure::Usage(
                    "--method quadrature needs --law; grids only support fft".into(),
                ));
            }
            self_difference(&read_grid(&read_input(Some(path))?)?)?
        }
        _ => return Err(Failure::Usage("give exactly one of --law or --input".into())),
    };
    write_output(a.out.as_deref(), &grid_to_string(&d, a.format)?)?;
    Ok(true)
}

fn closed_form(law: Law, t: f64) -> Result<MgfValue> {
    match law {
        Law::NormalProduct => mgf_product_closed_form(t),
        Law::Laplace => mgf_difference_closed_form(t),
        Law::Normal => {
            let value = (0.5 * t * t).exp();
            Ok(MgfValue {
                t,
                value,
                abs_error_estimate: 2.0 * f64::EPSILON * value,
                method: MgfMethod::ClosedForm,
            })
        }
    }
}

fn cmd_mgf(a: &MgfArgs) -> CmdResult {
    check_positive("tol-mgf", a.tol_mgf)?;
    let d = a.law.density();
    let mut rows = Vec::new();
    for &t in &a.t {
        if !t.is_finite() {
            return Err(Failure::Usage(format!("--t values must be finite, got {t}")));
        }
        rows.push(mgf_via_density(&d, t, a.tol_mgf)?);
        if a.law == Law::NormalProduct {
            rows.push(mgf_via_conditioning(t, a.tol_mgf)?);
        }
        rows.push(closed_form(a.law, t)?);
    }
    write_output(a.out.as_deref(), &json::to_string(&rows)?)?;
    Ok(true)
}

fn cmd_shape(a: &ShapeArgs) -> CmdResult {
    check_positive("tol-shape", a.tol_shape)?;
    let verdict = match a.property {
        Property::LogConcave => {
            let g = read_grid(&read_input(a.input.as_deref())?)?;
            check_log_concavity_grid(&g, a.tol_shape)?
        }
        Property::LogConvex => {
            let k0 = |x: f64| bessel_k0(x).map_or(f64::NAN, |r| r.value);
            check_log_convexity_interval(k0, a.a, a.b, a.probes, a.tol_shape)?
        }
        Property::RatioIncreasing => check_ratio_monotonicity(a.a, a.b, a.probes)?,
    };
    write_output(a.out.as_deref(), &json::to_string(&verdict)?)?;
    Ok(verdict.holds())
}

fn cmd_sample(a: &SampleArgs) -> CmdResult {
    let batch = sample(a.generator, a.seed, a.n)?;
    let text = match a.format {
        Format::Csv => batch.to_csv_string(),
        Format::Json => json::to_string(&batch)?,
    };
    write_output(a.out.as_deref(), &text)?;
    match &a.ks_out {
        None => Ok(true),
        Some(path) => {
            let cdf = a.ks_law.cdf_fn();
            let report = ks_statistic(&batch, cdf, a.alpha)?;
            write_output(Some(path), &json::to_string(&report)?)?;
            Ok(report.pass)
        }
    }
}

pub fn execute(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::VerifyTheorem(a) => cmd_verify_theorem(a),
        Command::Density(a) => cmd_density(a),
        Command::Selfdiff(a) => cmd_selfdiff(a),
        Command::Mgf(a) => cmd_mgf(a),
        Command::Shape(a) => cmd_shape(a),
        Command::Sample(a) => cmd_sample(a),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

//! Command-line front end. [`run`] holds all the logic so it can be driven
//! from tests; `main` only forwards the process arguments and exit code.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::binomial_chvatal::{scan_fixed_n, uniform_p_grid, verify_chvatal, ChvatalSummary};
use crate::cumulants::{bernoulli_distribution, poisson1_analytic, LatticeDistribution};
use crate::edgeworth::{
    default_grid, log_log_slope, residual_scan, BinomialOracle, EdgeworthModel, PoissonOracle,
    Variant, MAX_ORDER,
};
use crate::error::{Error, Result};
use crate::exactprob::{
    binomial_cdf_rational, poisson_cdf, rational_to_f64, verify_poisson_monotonicity,
    DEFAULT_PRECISION_BITS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNCERTIFIED: i32 = 3;

/// Environment variable overriding the default precision in bits.
pub const PRECISION_ENV: &str = "EDGEWORTH_PRECISION_BITS";

#[derive(Debug, Parser)]
#[command(
    name = "edgeworth",
    version,
    about = "Lattice Edgeworth expansions and exact binomial/Poisson checks"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact check that q_m = P(Bi(n, m/n) <= m) is smallest at the integer nearest 2n/3
    Verify(VerifyArgs),
    /// Exact P(Bi(n, p) <= np) and P(Bi(n, p) < np) over a p grid, as CSV
    Scan(ScanArgs),
    /// Sup-norm residuals of the lattice expansion against exact CDFs
    Residual(ResidualArgs),
    /// Certified monotonicity of P(Po(m) < m) and P(Po(m) <= m)
    Poisson(PoissonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// check 2 <= n <= N
    #[arg(
        long,
        value_name = "N",
        conflicts_with = "n_range",
        required_unless_present = "n_range"
    )]
    pub n_max: Option<u64>,
    /// check A <= n <= B
    #[arg(long, value_name = "A..B")]
    pub n_range: Option<NRange>,
    /// worker threads (default: all cores)
    #[arg(long, value_name = "J")]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub n: u64,
    /// interior grid points p = i/(G+1)
    #[arg(long, value_name = "G", default_value_t = 1000)]
    pub grid_points: u64,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    /// `bernoulli:NUM/DEN` or `poisson1`
    #[arg(long)]
    pub dist: DistSpec,
    /// expansion order
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=MAX_ORDER as u64))]
    pub k: u64,
    /// comma-separated sample sizes
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<u64>,
    /// only evaluate at x = 0 with the integer-mean expansion (needs n * mean integral)
    #[arg(long)]
    pub at_mean: bool,
    /// with --at-mean, approximate P(S_n < n mean) instead of P(S_n <= n mean)
    #[arg(long, requires = "at_mean")]
    pub strict: bool,
    #[arg(long, value_enum, default_value_t = VariantArg::Simplified)]
    pub variant: VariantArg,
    #[arg(long, env = PRECISION_ENV, default_value_t = DEFAULT_PRECISION_BITS,
          value_parser = clap::value_parser!(u32).range(64..))]
    pub precision_bits: u32,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PoissonArgs {
    #[arg(long, value_name = "M")]
    pub m_max: u64,
    #[arg(long, env = PRECISION_ENV, default_value_t = DEFAULT_PRECISION_BITS,
          value_parser = clap::value_parser!(u32).range(64..))]
    pub precision_bits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Full,
    Simplified,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Full => Variant::Full,
            VariantArg::Simplified => Variant::Simplified,
        }
    }
}

/// Inclusive range `A..B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub start: u64,
    pub end: u64,
}

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once("..").ok_or("expected A..B")?;
        let b = b.strip_prefix('=').unwrap_or(b);
        let start = a.trim().parse::<u64>().map_err(|e| e.to_string())?;
        let end = b.trim().parse::<u64>().map_err(|e| e.to_string())?;
        if start > end {
            return Err(format!("empty range {start}..{end}"));
        }
        Ok(Self { start, end })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistSpec {
    Bernoulli(BigRational),
    Poisson1,
}

impl FromStr for DistSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "poisson1" {
            return Ok(Self::Poisson1);
        }
        let p = s
            .strip_prefix("bernoulli:")
            .ok_or_else(|| format!("unknown distribution `{s}`"))?;
        Ok(Self::Bernoulli(
            parse_rational(p).map_err(|e| e.to_string())?,
        ))
    }
}

impl DistSpec {
    fn build(&self, order: usize) -> Result<LatticeDistribution> {
        match self {
            Self::Bernoulli(p) => bernoulli_distribution(p, order),
            Self::Poisson1 => poisson1_analytic(order),
        }
    }
}

/// Parses `num/den` or an integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("`{s}` is not a rational of the form num/den"));
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den == BigInt::from(0) {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &config.command {
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::Scan(a) => cmd_scan(a, out, err),
        Command::Residual(a) => cmd_residual(a, out, err),
        Command::Poisson(a) => cmd_poisson(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(io::Error),
    Lib(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(s) => write!(f, "{s}"),
            Self::Io(e) => write!(f, "{e}"),
            Self::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

type CliResult = std::result::Result<i32, CliError>;

/// Runs `f` against either the named file or the given writer.
fn with_output(
    path: &Option<PathBuf>,
    out: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> CliResult,
) -> CliResult {
    match path {
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            let code = f(&mut w)?;
            w.flush()?;
            Ok(code)
        }
        None => {
            let code = f(out)?;
            out.flush()?;
            Ok(code)
        }
    }
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let (start, end) = match (a.n_max, a.n_range) {
        (Some(n), _) => (2, n),
        (None, Some(r)) => (r.start, r.end),
        (None, None) => return Err(CliError::Usage("give --n-max or --n-range".into())),
    };
    if start < 2 || end < start {
        return Err(CliError::Usage(format!(
            "n must satisfy 2 <= n; got the range {start}..{end}"
        )));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = a.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;

    let format = a.format;
    with_output(&a.out, out, |w| {
        if format == Format::Csv {
            writeln!(w, "n,argmin,target,unimodal,matches,sign_changes")?;
        }
        let mut failures = 0u64;
        let chunk = 32u64;
        let mut lo = start;
        while lo <= end {
            let hi = end.min(lo + chunk - 1);
            let batch: Vec<Result<ChvatalSummary>> = pool.install(|| {
                (lo..=hi)
                    .into_par_iter()
                    .map(|n| verify_chvatal(n).map(|r| r.summary()))
                    .collect()
            });
            for s in batch {
                let s = s?;
                write_summary(w, &s, format)?;
                if !s.matches || !s.unimodal {
                    failures += 1;
                    writeln!(
                        err,
                        "counterexample: n={} argmin={} target={} unimodal={}",
                        s.n, s.argmin, s.target, s.unimodal
                    )?;
                }
            }
            lo = hi + 1;
        }
        let total = end - start + 1;
        if failures == 0 {
            writeln!(err, "verified {total} values of n in {start}..={end}")?;
            Ok(EXIT_OK)
        } else {
            writeln!(err, "{failures} of {total} values of n failed")?;
            Ok(EXIT_COUNTEREXAMPLE)
        }
    })
}

fn write_summary(w: &mut dyn Write, s: &ChvatalSummary, format: Format) -> io::Result<()> {
    match format {
        Format::Json => {
            let line = serde_json::to_string(s).map_err(io::Error::other)?;
            writeln!(w, "{line}")
        }
        Format::Csv => {
            let changes: Vec<String> = s.sign_changes.iter().map(u64::to_string).collect();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                s.n,
                s.argmin,
                s.target,
                s.unimodal,
                s.matches,
                changes.join(";")
            )
        }
    }
}

fn cmd_scan(a: &ScanArgs, out: &mut dyn Write, _err: &mut dyn Write) -> CliResult {
    if a.grid_points < 2 {
        return Err(CliError::Usage("--grid-points must be at least 2".into()));
    }
    if a.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let rows = scan_fixed_n(a.n, &uniform_p_grid(a.grid_points))?;
    with_output(&a.out, out, |w| {
        writeln!(w, "p,cdf_le,cdf_lt,rp_approx,rp_residual")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_rational(&r.p),
                fmt_f64(rational_to_f64(&r.cdf_le)),
                fmt_f64(rational_to_f64(&r.cdf_lt)),
                fmt_f64(r.rp_approx),
                fmt_f64(r.rp_residual())
            )?;
        }
        Ok(EXIT_OK)
    })
}

struct ResidualRow {
    n: u64,
    scale: f64,
    within: bool,
    residual: f64,
}

fn residual_at_mean(a: &ResidualArgs, dist: &LatticeDistribution, n: u64) -> Result<f64> {
    let center = &dist.mean * BigRational::from_integer(BigInt::from(n));
    if !center.is_integer() {
        return Err(Error::Domain(format!(
            "n * mean = {center} is not an integer"
        )));
    }
    let t: i64 = center
        .to_integer()
        .try_into()
        .map_err(|_| Error::Domain("n * mean too large".into()))?;
    let model = EdgeworthModel::new(dist, a.k as usize)?;
    let approx = model.integer_mean_coefficients(a.strict).eval(n);
    let exact = match &a.dist {
        DistSpec::Bernoulli(p) => rational_to_f64(&binomial_cdf_rational(n, p, t, a.strict)?),
        DistSpec::Poisson1 => {
            let rate = BigRational::from_integer(BigInt::from(n));
            poisson_cdf(&rate, t, a.strict, a.precision_bits)?.value()
        }
    };
    Ok((approx - exact).abs())
}

fn residual_scan_sup(a: &ResidualArgs, dist: &LatticeDistribution, n: u64) -> Result<f64> {
    let model = EdgeworthModel::new(dist, a.k as usize)?;
    let grid = default_grid();
    let scan = match &a.dist {
        DistSpec::Bernoulli(p) => {
            let oracle = BinomialOracle::new(n, p)?;
            residual_scan(&model, n, &grid, &oracle, a.variant.into())?
        }
        DistSpec::Poisson1 => {
            let nf = n as f64;
            let t_max = (nf + 5.0 * nf.sqrt()).ceil() as u64 + 2;
            let rate = BigRational::from_integer(BigInt::from(n));
            let oracle = PoissonOracle::new(&rate, t_max, a.precision_bits)?;
            residual_scan(&model, n, &grid, &oracle, a.variant.into())?
        }
    };
    Ok(scan.sup_residual)
}

fn cmd_residual(a: &ResidualArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    if a.n_list.contains(&0) {
        return Err(CliError::Usage("every n must be positive".into()));
    }
    let dist = a.dist.build(a.k as usize + 2)?;
    let sigma = dist.sigma();
    let rows: Vec<ResidualRow> = a
        .n_list
        .par_iter()
        .map(|&n| -> Result<ResidualRow> {
            let residual = if a.at_mean {
                residual_at_mean(a, &dist, n)?
            } else {
                residual_scan_sup(a, &dist, n)?
            };
            let scale = sigma * (n as f64).sqrt();
            Ok(ResidualRow {
                n,
                scale,
                within: scale >= (n as f64).ln(),
                residual,
            })
        })
        .collect::<Result<_>>()?;

    with_output(&a.out, out, |w| {
        writeln!(w, "n,sigma_sqrt_n,within_guarantee,sup_residual")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{}",
                r.n,
                fmt_f64(r.scale),
                r.within,
                fmt_f64(r.residual)
            )?;
        }
        Ok(EXIT_OK)
    })?;

    let qualified: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.within)
        .map(|r| (r.n as f64, r.residual))
        .collect();
    if qualified.len() < 3 {
        writeln!(
            err,
            "warning: only {} n inside the guarantee region; slope omitted",
            qualified.len()
        )?;
    } else if let Some(slope) = log_log_slope(&qualified) {
        writeln!(err, "slope {:.4} over {} n", slope, qualified.len())?;
    }
    Ok(EXIT_OK)
}

fn cmd_poisson(a: &PoissonArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    if a.m_max < 1 {
        return Err(CliError::Usage("--m-max must be at least 1".into()));
    }
    let report = verify_poisson_monotonicity(a.m_max, a.precision_bits)?;
    for f in &report.findings {
        writeln!(err, "m={} {:?}: {:?}", f.m, f.relation, f.outcome)?;
    }
    writeln!(
        out,
        "checked {} inequalities for 1 <= m <= {} at {} bits: {} violated, {} uncertified",
        report.checks,
        a.m_max,
        a.precision_bits,
        report.violations(),
        report.uncertified()
    )?;
    Ok(if report.violations() > 0 {
        EXIT_COUNTEREXAMPLE
    } else if report.uncertified() > 0 {
        EXIT_UNCERTIFIED
    } else {
        EXIT_OK
    })
}

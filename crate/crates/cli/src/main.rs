//! `padic-bessel`: evaluate kernels, Green functions and heat kernels on
//! `Q_p^n`, run certification suites, and write CSV tables.

mod format;
mod suites;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use padic_bessel::green_function::{green_g, GreenParams};
use padic_bessel::heat_kernel::{heat_z, HeatQuery};
use padic_bessel::padic_core::{FiniteGrid, NormExponent, PrimeDim, SeriesValue};
use padic_bessel::radial_transform::kernel_k;
use padic_bessel::symbol_algebra::{
    hypothesis_a_report, negdef_sample_check, BesselSymbol, RadialSpec, DEFAULT_WINDOW,
};
use padic_bessel::Error;

use format::{g17, CsvRow};
use suites::{Suite, SuiteCase};

#[derive(Debug, Parser)]
#[command(name = "padic-bessel", version, about = "Bessel potentials, Green functions and heat kernels on Q_p^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one quantity over a range of norm exponents, as CSV.
    Eval {
        quantity: Quantity,
        #[command(flatten)]
        run: RunConfig,
    },
    /// Run a certification suite, or `all`.
    Verify {
        suite: SuiteArg,
        #[command(flatten)]
        run: RunConfig,
    },
    /// CSV over a parameter grid of primes, dimensions and orders.
    Tabulate {
        /// Quantities to tabulate.
        #[arg(long, value_delimiter = ',', default_value = "kernel,green,heat")]
        quantities: Vec<Quantity>,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        primes: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        dims: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        alphas: Vec<f64>,
        #[command(flatten)]
        run: RunConfig,
    },
    /// Describe a symbol.
    Inspect {
        what: InspectArg,
        /// Random trials for the negative definiteness spot check.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        run: RunConfig,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    Kernel,
    Green,
    Heat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InspectArg {
    Symbol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    #[value(name = "formula1-oracle")]
    Formula1Oracle,
    FourierInvolution,
    KernelOracle,
    Semigroup,
    Mass,
    Positivity,
    GreenBounds,
    GreenDelta,
    HeatNonpositive,
    Cauchy,
    DeltaLimit,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value = "const:1")]
    pub psi1: String,
    #[arg(long, default_value = "power:a=1,b=2")]
    pub psi2: String,
    /// Inclusive range `lo..hi` of norm exponents.
    #[arg(long, default_value = "-3..3", value_parser = parse_range, allow_hyphen_values = true)]
    pub gamma: RangeInclusive<i32>,
    /// Green function masses, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub m: Vec<f64>,
    /// Heat kernel times, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Outer exponent M of the suite grids.
    #[arg(long, default_value_t = 4)]
    pub grid_m: u32,
    /// Resolution exponent N of the suite grids.
    #[arg(long, default_value_t = 4)]
    pub grid_n: u32,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest grid the oracle enumerates point by point.
    #[arg(long)]
    pub budget: Option<u128>,
    /// Require `|ψ1|`, `|ψ2|` strictly increasing for the heat suite.
    #[arg(long)]
    pub strict_monotone: bool,
}

impl RunConfig {
    pub fn dims(&self) -> Result<PrimeDim, Error> {
        PrimeDim::new(self.p, self.n)
    }

    pub fn symbol(&self) -> Result<BesselSymbol, Error> {
        self.symbol_in(self.dims()?, self.alpha)
    }

    pub fn symbol_in(&self, dims: PrimeDim, alpha: f64) -> Result<BesselSymbol, Error> {
        BesselSymbol::parse(&self.psi1, &self.psi2, alpha, dims)
    }

    pub fn grid(&self) -> Result<FiniteGrid, Error> {
        let grid = FiniteGrid::new(self.dims()?, self.grid_m, self.grid_n)?;
        Ok(match self.budget {
            Some(b) => grid.with_budget(b),
            None => grid,
        })
    }

    fn writer(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn parse_range(s: &str) -> Result<RangeInclusive<i32>, String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
    let lo: i32 = lo.parse().map_err(|_| format!("bad lower bound {lo:?}"))?;
    let hi: i32 = hi.parse().map_err(|_| format!("bad upper bound {hi:?}"))?;
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok(lo..=hi)
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(Error),
    Io(io::Error),
    Suite(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidArgument(_) | Error::NotPrime(_) | Error::ZeroDimension => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Numeric(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Suite(failed)) => {
            eprintln!("{failed} case(s) failed");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Eval { quantity, run } => eval(quantity, &run),
        Command::Verify { suite, run } => verify(suite, &run),
        Command::Tabulate { quantities, primes, dims, alphas, run } => {
            tabulate(&quantities, &primes, &dims, &alphas, &run)
        }
        Command::Inspect { what: InspectArg::Symbol, trials, run } => inspect(trials, &run),
    }
}

fn check_values(run: &RunConfig) -> Result<(), Failure> {
    if !(run.tol > 0.0 && run.tol < 1.0) {
        return Err(Failure::Usage(format!("--tol must lie in (0, 1), got {}", run.tol)));
    }
    if let Some(m) = run.m.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(Failure::Usage(format!("--m must be positive, got {m}")));
    }
    if let Some(t) = run.t.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Failure::Usage(format!("--t must be >= 0, got {t}")));
    }
    Ok(())
}

/// Rows for one symbol, in `γ`-major then `t` or `m` order.
fn rows_for(quantity: Quantity, symbol: &BesselSymbol, run: &RunConfig) -> Result<Vec<CsvRow>, Failure> {
    let p = symbol.dims().p();
    let mut rows = Vec::new();
    for gamma in run.gamma.clone() {
        let at = NormExponent::Finite(gamma);
        let mut push = |v: SeriesValue, t: Option<f64>, m: Option<f64>| rows.push(CsvRow { p, gamma, value: v, t, m });
        match quantity {
            Quantity::Kernel => push(kernel_k(symbol, at, run.tol)?, None, None),
            Quantity::Green => {
                for &m in &run.m {
                    push(green_g(&GreenParams::new(symbol.clone(), m)?, at, run.tol)?, None, Some(m));
                }
            }
            Quantity::Heat => {
                for &t in &run.t {
                    push(heat_z(&HeatQuery::new(symbol.clone(), t)?, at, run.tol)?, Some(t), None);
                }
            }
        }
    }
    Ok(rows)
}

fn header(quantity: Quantity) -> &'static str {
    match quantity {
        Quantity::Kernel => "gamma,norm,value,tail_bound,terms_used",
        Quantity::Green => "gamma,norm,value,tail_bound,terms_used,m",
        Quantity::Heat => "gamma,norm,value,tail_bound,terms_used,t",
    }
}

fn eval(quantity: Quantity, run: &RunConfig) -> Result<(), Failure> {
    check_values(run)?;
    let symbol = run.symbol()?;
    let rows = rows_for(quantity, &symbol, run)?;
    let mut out = run.writer()?;
    writeln!(out, "{}", header(quantity))?;
    for row in rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    out.flush()?;
    Ok(())
}

fn tabulate(
    quantities: &[Quantity],
    primes: &[u32],
    dims: &[u32],
    alphas: &[f64],
    run: &RunConfig,
) -> Result<(), Failure> {
    check_values(run)?;
    let mut out = run.writer()?;
    writeln!(out, "gamma,norm,value,tail_bound,terms_used,t,m,quantity,p,n,alpha")?;
    for &quantity in quantities {
        for &p in primes {
            for &n in dims {
                let d = PrimeDim::new(p, n)?;
                for &alpha in alphas {
                    let symbol = run.symbol_in(d, alpha)?;
                    let name = format!("{quantity:?}").to_lowercase();
                    for row in rows_for(quantity, &symbol, run)? {
                        let t = row.t.map(g17).unwrap_or_default();
                        let m = row.m.map(g17).unwrap_or_default();
                        writeln!(out, "{},{t},{m},{name},{p},{n},{}", row.base_csv(), g17(alpha))?;
                    }
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn verify(suite: SuiteArg, run: &RunConfig) -> Result<(), Failure> {
    check_values(run)?;
    let selected: Vec<Suite> = match suite {
        SuiteArg::All => Suite::ALL.to_vec(),
        SuiteArg::Formula1Oracle => vec![Suite::Formula1Oracle],
        SuiteArg::FourierInvolution => vec![Suite::FourierInvolution],
        SuiteArg::KernelOracle => vec![Suite::KernelOracle],
        SuiteArg::Semigroup => vec![Suite::Semigroup],
        SuiteArg::Mass => vec![Suite::Mass],
        SuiteArg::Positivity => vec![Suite::Positivity],
        SuiteArg::GreenBounds => vec![Suite::GreenBounds],
        SuiteArg::GreenDelta => vec![Suite::GreenDelta],
        SuiteArg::HeatNonpositive => vec![Suite::HeatNonpositive],
        SuiteArg::Cauchy => vec![Suite::Cauchy],
        SuiteArg::DeltaLimit => vec![Suite::DeltaLimit],
    };
    let mut out = run.writer()?;
    let mut failed = 0;
    for s in selected {
        let cases: Vec<SuiteCase> = s.run(run)?;
        let bad = cases.iter().filter(|c| !c.pass).count();
        for c in &cases {
            writeln!(out, "{}", serde_json::to_string(c).expect("suite cases serialize"))?;
        }
        let worst = cases.iter().filter_map(|c| c.margin).fold(f64::INFINITY, f64::min);
        eprintln!(
            "{:<18} {} {}/{} cases, worst margin {}",
            s.name(),
            if bad == 0 { "PASS" } else { "FAIL" },
            cases.len() - bad,
            cases.len(),
            g17(worst)
        );
        failed += bad;
    }
    out.flush()?;
    if failed > 0 {
        return Err(Failure::Suite(failed));
    }
    Ok(())
}

fn inspect(trials: usize, run: &RunConfig) -> Result<(), Failure> {
    let dims = run.dims()?;
    let psi1: RadialSpec = run.psi1.parse().map_err(Error::from)?;
    let psi2: RadialSpec = run.psi2.parse().map_err(Error::from)?;
    let report = hypothesis_a_report(&psi1, &psi2, dims, DEFAULT_WINDOW)?;
    let grid = run.grid()?;
    let negdef1 = negdef_sample_check(&psi1, &grid, trials, 1e-9, run.seed)?;
    let negdef2 = negdef_sample_check(&psi2, &grid, trials, 1e-9, run.seed)?;
    let doc = serde_json::json!({
        "psi1": run.psi1,
        "psi2": run.psi2,
        "p": run.p,
        "n": run.n,
        "hypothesis_a": report,
        "negdef_psi1": negdef1,
        "negdef_psi2": negdef2,
    });
    let mut out = run.writer()?;
    writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("report serializes"))?;
    out.flush()?;
    Ok(())
}

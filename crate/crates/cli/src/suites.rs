//! The `verify` suites. Each returns one [`SuiteCase`] per checked item.

use num_complex::Complex64;
use padic_bessel::green_function::{green_bounds_certify, green_delta_residual, green_g, GreenParams};
use padic_bessel::heat_kernel::{cauchy_solve, grid_mass, heat_z, mass_evolution, nonpositivity_certify, HeatQuery};
use padic_bessel::oracle_grid::{
    compare_suite, grid_dft, grid_dft_factored, oracle_kernel_value, oracle_setup, sphere_character_sum, Direction,
    OracleMode, OracleValue,
};
use padic_bessel::padic_core::{unit_sphere_char_integral, FiniteGrid, NormExponent, PadicVector, SeriesValue};
use padic_bessel::radial_transform::{
    kernel_k, kernel_mass, positivity_scan, GreenProfile, HeatProfile, SymbolProfile, TestFunction,
};
use padic_bessel::semigroup_measures::{delta_limit_scan, grid_samples, kernel_grid_mass, symbol_semigroup_identity};
use padic_bessel::symbol_algebra::psi_value;
use padic_bessel::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteCase {
    pub suite: &'static str,
    pub case: String,
    pub pass: bool,
    /// Distance to the threshold, negative on failure; `null` for yes/no checks.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
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
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Formula1Oracle,
        Suite::FourierInvolution,
        Suite::KernelOracle,
        Suite::Semigroup,
        Suite::Mass,
        Suite::Positivity,
        Suite::GreenBounds,
        Suite::GreenDelta,
        Suite::HeatNonpositive,
        Suite::Cauchy,
        Suite::DeltaLimit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Formula1Oracle => "formula1-oracle",
            Suite::FourierInvolution => "fourier-involution",
            Suite::KernelOracle => "kernel-oracle",
            Suite::Semigroup => "semigroup",
            Suite::Mass => "mass",
            Suite::Positivity => "positivity",
            Suite::GreenBounds => "green-bounds",
            Suite::GreenDelta => "green-delta",
            Suite::HeatNonpositive => "heat-nonpositive",
            Suite::Cauchy => "cauchy",
            Suite::DeltaLimit => "delta-limit",
        }
    }

    pub fn run(self, run: &RunConfig) -> Result<Vec<SuiteCase>> {
        let mut out = Cases { suite: self.name(), cases: Vec::new() };
        let result = match self {
            Suite::Formula1Oracle => formula1(run, &mut out),
            Suite::FourierInvolution => involution(run, &mut out),
            Suite::KernelOracle => kernel_oracle(run, &mut out),
            Suite::Semigroup => semigroup(run, &mut out),
            Suite::Mass => mass(run, &mut out),
            Suite::Positivity => positivity(run, &mut out),
            Suite::GreenBounds => green_bounds(run, &mut out),
            Suite::GreenDelta => green_delta(run, &mut out),
            Suite::HeatNonpositive => heat(run, &mut out),
            Suite::Cauchy => cauchy(run, &mut out),
            Suite::DeltaLimit => delta_limit(run, &mut out),
        };
        match result {
            Ok(()) => {}
            // an unmet hypothesis is a failed certification, not a crash
            Err(e @ (Error::PreconditionFailed { .. } | Error::HypothesisAViolation { .. })) => {
                out.flag(format!("precondition: {e}"), false);
            }
            Err(e) => return Err(e),
        }
        Ok(out.cases)
    }
}

struct Cases {
    suite: &'static str,
    cases: Vec<SuiteCase>,
}

impl Cases {
    /// `pass` iff `margin ≥ 0`.
    fn margin(&mut self, case: String, margin: f64) {
        self.cases.push(SuiteCase { suite: self.suite, case, pass: margin >= 0.0, margin: Some(margin) });
    }

    fn flag(&mut self, case: String, pass: bool) {
        self.cases.push(SuiteCase { suite: self.suite, case, pass, margin: None });
    }
}

const FINE: f64 = 1e-10;

fn formula1(run: &RunConfig, out: &mut Cases) -> Result<()> {
    let d = run.dims()?;
    let ones = PadicVector::from_integers(d.p(), &vec![1; d.n() as usize]);
    for (name, x0) in [("e1", PadicVector::with_norm(d, 0)), ("ones", ones)] {
        for j in -3..=4 {
            let diff = (unit_sphere_char_integral(j, d) - sphere_character_sum(d, j, &x0, j.max(1) as u32)?).abs();
            out.margin(format!("j={j} x0={name}"), FINE - diff);
        }
    }
    Ok(())
}

fn involution(run: &RunConfig, out: &mut Cases) -> Result<()> {
    let grid = run.grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let f: Vec<Complex64> =
        (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let once = grid_dft(&f, &grid, Direction::Forward)?;
    let twice = grid_dft(&once, &grid.dual(), Direction::Forward)?;
    let reflection =
        grid.points().map(|x| (twice[grid.index_of(&x)] - f[grid.index_of(&grid.neg(&x))]).norm()).fold(0.0, f64::max);
    out.margin("F F f = f(-x)".into(), FINE - reflection);
    let back = grid_dft(&once, &grid.dual(), Direction::Inverse)?;
    let inverse = back.iter().zip(&f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    out.margin("inverse round trip".into(), FINE - inverse);
    let factored = grid_dft_factored(&f, &grid, Direction::Forward)?;
    let agree = factored.iter().zip(&once).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    out.margin("factored = direct".into(), FINE - agree);
    let lhs: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.weight();
    let rhs: f64 = once.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dual().weight();
    out.margin("Parseval".into(), FINE - (lhs - rhs).abs());
    Ok(())
}

enum Which {
    Kernel,
    Green(f64),
    Heat(f64),
}

fn kernel_oracle(run: &RunConfig, out: &mut Cases) -> Result<()> {
    let symbol = run.symbol()?;
    let d = symbol.dims();
    let mut inputs = Vec::new();
    for gamma in run.gamma.clone() {
        inputs.push((gamma, Which::Kernel));
        inputs.extend(run.m.iter().map(|&m| (gamma, Which::Green(m))));
        inputs.extend(run.t.iter().filter(|&&t| t > 0.0).map(|&t| (gamma, Which::Heat(t))));
    }
    let label = |(g, w): &(i32, Which)| match w {
        Which::Kernel => format!("K gamma={g}"),
        Which::Green(m) => format!("G m={m} gamma={g}"),
        Which::Heat(t) => format!("Z t={t} gamma={g}"),
    };
    let series = |(g, w): &(i32, Which)| -> Result<SeriesValue> {
        let at = NormExponent::Finite(*g);
        match w {
            Which::Kernel => kernel_k(&symbol, at, run.tol),
            Which::Green(m) => green_g(&GreenParams::new(symbol.clone(), *m)?, at, run.tol),
            Which::Heat(t) => heat_z(&HeatQuery::new(symbol.clone(), *t)?, at, run.tol),
        }
    };
    let oracle = |(g, w): &(i32, Which)| -> Result<OracleValue> {
        let (grid, x) = oracle_setup(d, *g, 2)?;
        let grid = match run.budget {
            Some(b) => grid.with_budget(b),
            None => grid,
        };
        match w {
            Which::Kernel => oracle_kernel_value(&SymbolProfile(symbol.clone()), &x, &grid, OracleMode::Auto),
            Which::Green(m) => {
                oracle_kernel_value(&GreenProfile { symbol: symbol.clone(), m: *m }, &x, &grid, OracleMode::Auto)
            }
            Which::Heat(t) => {
                oracle_kernel_value(&HeatProfile { symbol: symbol.clone(), t: *t }, &x, &grid, OracleMode::Auto)
            }
        }
    };
    let report = compare_suite(&inputs, label, series, oracle);
    for c in report.cases {
        let case = match c.error {
            Some(err) => format!("{}: {err}", c.case),
            None => c.case,
        };
        out.cases.push(SuiteCase { suite: out.suite, case, pass: c.pass, margin: Some(c.margin) });
    }
    Ok(())
}

/// Exponents of `run.gamma` that name nonzero points of `grid`.
fn on_grid(run: &RunConfig, grid: &FiniteGrid) -> Vec<i32> {
    run.gamma.clone().filter(|&g| g > -(grid.resolution() as i32) && g <= grid.outer() as i32).collect()
}

fn semigroup(run: &RunConfig, out: &mut Cases) -> Result<()> {
    let symbol = run.symbol()?;
    let grid = run.grid()?;
    let gammas = on_grid(run, &grid);
    for (a1, a2) in [(1.0, 1.0), (0.5, 1.5), (2.0, 3.0)] {
        let r = symbol_semigroup_identity(&symbol, a1, a2, &gammas, &grid)?;
        out.margin(format!("S_{a1} S_{a2} = S_{}", a1 + a2), 1e-14 - r.fourier_residual);
        for row in r.rows {
            out.margin(format!("K_{a1} * K_{a2} gamma={}", row.gamma), row.allowed - row.residual);
        }
    }
    Ok(())
}

fn mass(run: &RunConfig, out: &mut Cases) -> Result<()> {
    let symbol = run.symbol()?;
    let expect = psi_value(symbol.psi1(), symbol.dims(), NormExponent::Zero)?.abs().powf(-symbol.alpha());
    let m = kernel_mass(&symbol)?;
    out.margin("mass = |psi1(0)|^-alpha".into(), 1e-12 * expect.max(1.0) - (m - expect).abs());
    let gm = kernel_grid_mass(&symbol, &run.grid()?, run.tol)?;
    out.margin("grid integration".into(), gm.estimate - (gm.mass - m).abs());
    Ok(())
}

fn positivity(run: &RunConfig, out: &mut Cases) -> Result<()> {
    let r = positivity_scan(&run.symbol()?, run.gamma.clone(), 1e-12)?;
    let precondition = match r.precondition_violation {
        None => "S non-increasing".to_string(),
        Some(g) => format!("S non-increasing (fails at {g})"),
    };
    out.flag(precondition, r.precondition_holds);
    for (g, v) in r.values {
        out.margin(format!("K gamma={g}"), v.value + r.tol);
    }
    Ok(())
}

fn green_bounds(run: &RunConfig, out: &mut Cases) -> Result<()> {
    let symbol = run.symbol()?;
    for &m in &run.m {
        let r = green_bounds_certify(&GreenParams::new(symbol.clone(), m)?, run.gamma.clone())?;
        for row in r.rows {
            out.cases.push(SuiteCase {
                suite: out.suite,
                case: format!("m={m} gamma={}", row.gamma),
                pass: row.pass,
                margin: Some(row.lower_margin.min(row.upper_margin)),
            });
        }
    }
    Ok(())
}

fn test_functions(run: &RunConfig) -> Result<Vec<TestFunction>> {
    let d = run.dims()?;
    let one = Complex64::new(1.0, 0.0);
    let far = PadicVector::with_norm(d, 2);
    Ok(vec![
        TestFunction::unit_ball(d),
        TestFunction::ball(d, far.clone(), -1, one)?,
        TestFunction::ball(d, PadicVector::zero(d), -2, Complex64::new(2.0, 0.0))?,
        TestFunction::ball(d, PadicVector::from_integers(d.p(), &vec![1; d.n() as usize]), 2, one)?,
        TestFunction::unit_ball(d).with_ball(far, -1, Complex64::new(0.5, -1.5))?.with_ball(
            PadicVector::with_norm(d, -1),
            -3,
            Complex64::new(-2.0, 0.0),
        )?,
    ])
}

fn green_delta(run: &RunConfig, out: &mut Cases) -> Result<()> {
    let symbol = run.symbol()?;
    let grid = run.grid()?;
    for &m in &run.m {
        let params = GreenParams::new(symbol.clone(), m)?;
        for (i, phi) in test_functions(run)?.iter().enumerate() {
            let r = green_delta_residual(&params, phi, &grid, run.tol)?;
            out.margin(format!("m={m} phi#{i}"), 1e-6 - r.residual);
        }
    }
    Ok(())
}

fn heat(run: &RunConfig, out: &mut Cases) -> Result<()> {
    let ts: Vec<f64> = run.t.iter().copied().filter(|&t| t > 0.0).collect();
    let r = nonpositivity_certify(&run.symbol()?, run.gamma.clone(), &ts, run.strict_monotone)?;
    out.flag(
        format!("proof cases outside={} boundary={} inside={}", r.outside, r.boundary, r.inside),
        r.outside > 0 && r.boundary > 0 && r.inside > 0,
    );
    for row in r.rows {
        let margin = (1e-12 - row.value.value).min(row.comparison + row.value.tail_bound + 1e-12 - row.value.value);
        out.margin(format!("Z t={} gamma={} {:?}", row.t, row.gamma, row.case), margin);
    }
    Ok(())
}

fn cauchy(run: &RunConfig, out: &mut Cases) -> Result<()> {
    let symbol = run.symbol()?;
    let d = symbol.dims();
    let grid = FiniteGrid::new(d, run.grid_m.min(2), run.grid_n.min(2))?;
    let samples = grid_samples(&grid)?;
    let u0 = TestFunction::unit_ball(d);
    let mut exact_at_zero = true;
    for f in test_functions(run)? {
        for x in &samples {
            exact_at_zero &= cauchy_solve(&symbol, &f, x, 0.0)? == f.eval(x);
        }
    }
    out.flag("u(0) = u0".into(), exact_at_zero);
    // S constant on the unit ball makes u a multiple of 1_{Z_p^n}
    let s0 = symbol.at_origin()?;
    let mut flat = true;
    for k in -64..=0 {
        flat &= symbol.value(NormExponent::Finite(k))?.value == s0;
    }
    for &t in &run.t {
        let exact = mass_evolution(&symbol, &u0, t)?;
        let on_grid = grid_mass(&symbol, &u0, t, &grid)?;
        out.margin(format!("mass t={t}"), 1e-8 - (exact - on_grid).abs());
        if flat {
            let mut worst: f64 = 0.0;
            for x in &samples {
                let expect = (-t * s0).exp() * u0.eval(x).re;
                worst = worst.max((cauchy_solve(&symbol, &u0, x, t)? - Complex64::new(expect, 0.0)).norm());
            }
            out.margin(format!("u = exp(-t S(0)) 1 t={t}"), 1e-12 - worst);
        }
    }
    Ok(())
}

fn delta_limit(run: &RunConfig, out: &mut Cases) -> Result<()> {
    let symbol = run.symbol()?;
    let d = symbol.dims();
    let samples = grid_samples(&FiniteGrid::new(d, run.grid_m.min(2), run.grid_n.min(2))?)?;
    let phi = TestFunction::unit_ball(d).with_ball(PadicVector::with_norm(d, 2), -1, Complex64::new(-0.5, 0.0))?;
    let r = delta_limit_scan(&symbol, &phi, &[1e-2, 1e-4, 1e-6], &samples)?;
    out.flag("deviations non-increasing".into(), r.non_increasing);
    let last = r.rows.last().map_or(0.0, |r| r.1);
    out.margin("deviation at alpha=1e-6".into(), 1e-5 - last);
    Ok(())
}

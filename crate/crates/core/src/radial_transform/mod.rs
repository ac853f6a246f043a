//! Radial series: Fourier transforms of radial multipliers, the convolution
//! kernel `K_α`, its mass, and the operator with multiplier `m` applied to
//! finite sums of ball indicators.
//!
//! Every series has the same shape. For a radial multiplier `g` and a point
//! of norm `p^γ`,
//!
//! ```text
//! ǧ(γ) = p^{-nγ} [ (1 − p^{-n}) Σ_{j≥0} p^{-nj} g(p^{-γ-j}) − g(p^{-γ+1}) ]
//! ```
//!
//! The sum is evaluated shell by shell until `g` has settled on its value at
//! the origin for [`STABLE_SHELLS`] consecutive shells; the rest is a
//! geometric series in `g(0)`.

mod test_function;

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic_core::{scaled_pow, CompensatedSum, NormExponent, PrimeDim, SeriesValue, WORKING_WINDOW};
use crate::symbol_algebra::BesselSymbol;

pub use test_function::{apply_operator, apply_operator_bounded, BallTerm, TestFunction};

pub const DEFAULT_TOL: f64 = 1e-12;

/// Consecutive settled shells required before the tail is summed in closed form.
pub const STABLE_SHELLS: usize = 8;

/// A multiplier value; `underflow` is set when part of it was flushed to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileValue {
    pub value: f64,
    pub underflow: bool,
}

impl ProfileValue {
    pub fn exact(value: f64) -> Self {
        Self { value, underflow: false }
    }
}

/// A function of `||ξ||` only.
pub trait RadialProfile: Sync {
    fn eval(&self, at: NormExponent) -> Result<ProfileValue>;

    fn describe(&self) -> String;
}

/// `S(ξ)` itself.
#[derive(Debug, Clone)]
pub struct SymbolProfile(pub BesselSymbol);

impl RadialProfile for SymbolProfile {
    fn eval(&self, at: NormExponent) -> Result<ProfileValue> {
        let s = self.0.value(at)?;
        Ok(ProfileValue { value: s.value, underflow: s.underflow })
    }

    fn describe(&self) -> String {
        format!("{}", self.0)
    }
}

/// `e^{-t S(ξ)}`.
#[derive(Debug, Clone)]
pub struct HeatProfile {
    pub symbol: BesselSymbol,
    pub t: f64,
}

impl RadialProfile for HeatProfile {
    fn eval(&self, at: NormExponent) -> Result<ProfileValue> {
        let s = self.symbol.value(at)?;
        Ok(ProfileValue { value: (-self.t * s.value).exp(), underflow: s.underflow })
    }

    fn describe(&self) -> String {
        format!("exp(-{} {})", self.t, self.symbol)
    }
}

/// `1 / (m² + S(ξ))`.
#[derive(Debug, Clone)]
pub struct GreenProfile {
    pub symbol: BesselSymbol,
    pub m: f64,
}

impl RadialProfile for GreenProfile {
    fn eval(&self, at: NormExponent) -> Result<ProfileValue> {
        let s = self.symbol.value(at)?;
        Ok(ProfileValue { value: 1.0 / (self.m * self.m + s.value), underflow: s.underflow })
    }

    fn describe(&self) -> String {
        format!("1/({}^2 + {})", self.m, self.symbol)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantProfile(pub f64);

impl RadialProfile for ConstantProfile {
    fn eval(&self, _: NormExponent) -> Result<ProfileValue> {
        Ok(ProfileValue::exact(self.0))
    }

    fn describe(&self) -> String {
        format!("const {}", self.0)
    }
}

/// Wraps a closure.
pub struct FnProfile<F> {
    name: String,
    f: F,
}

impl<F> FnProfile<F>
where
    F: Fn(NormExponent) -> f64 + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

impl<F> RadialProfile for FnProfile<F>
where
    F: Fn(NormExponent) -> f64 + Sync,
{
    fn eval(&self, at: NormExponent) -> Result<ProfileValue> {
        Ok(ProfileValue::exact((self.f)(at)))
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// `(1 − p^{-n}) Σ_{j≥0} p^{-nj} g(p^{top−j})` with its tail bound; this is
/// `p^{-n·top} ∫_{||ξ|| ≤ p^top} g(||ξ||) dξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSum {
    pub value: f64,
    /// `g(0)`, the value the shells settle on.
    pub limit: f64,
    /// `value − limit`, accumulated directly so constant stretches cancel exactly.
    pub deviation: f64,
    pub tail_bound: f64,
    pub terms: usize,
    pub underflow: bool,
}

fn limit_value(g: &dyn RadialProfile) -> Result<ProfileValue> {
    let g0 = match g.eval(NormExponent::Zero) {
        Ok(v) => v,
        Err(Error::Psi1Vanishes { .. }) => {
            return Err(Error::TailNotControlled { reason: format!("{} is unbounded at the origin", g.describe()) })
        }
        Err(e) => return Err(e),
    };
    if !g0.value.is_finite() {
        return Err(Error::TailNotControlled { reason: format!("{} has no finite value at the origin", g.describe()) });
    }
    Ok(g0)
}

/// Normalized ball integral of a radial profile, see [`BallSum`].
pub fn ball_sum(g: &dyn RadialProfile, dims: PrimeDim, top: i32, tol: f64) -> Result<BallSum> {
    NormExponent::Finite(top).check_window()?;
    let g0 = limit_value(g)?;
    let tol_abs = tol * g0.value.abs().max(1.0);
    let q = dims.p_pow_n(-1);
    let shell = dims.sphere_measure();
    let mut acc = CompensatedSum::default();
    let mut weight = 1.0;
    let mut settled = 0;
    let mut underflow = g0.underflow;
    let mut j = 0usize;
    loop {
        let k = top as i64 - j as i64;
        if k < -(WORKING_WINDOW as i64) {
            return Err(Error::TailNotControlled {
                reason: format!("{} has not settled on its origin value by exponent {}", g.describe(), -WORKING_WINDOW),
            });
        }
        let v = g.eval(NormExponent::Finite(k as i32))?;
        if !v.value.is_finite() {
            return Err(Error::TailNotControlled { reason: format!("{} is not finite at exponent {k}", g.describe()) });
        }
        underflow |= v.underflow;
        acc.add(shell * weight * (v.value - g0.value));
        settled = if (v.value - g0.value).abs() <= tol_abs { settled + 1 } else { 0 };
        weight *= q;
        j += 1;
        if settled >= STABLE_SHELLS {
            break;
        }
    }
    // the shell weights sum to one, so only deviations from g(0) are summed
    let deviation = acc.value();
    Ok(BallSum {
        value: g0.value + deviation,
        limit: g0.value,
        deviation,
        tail_bound: tol_abs * weight / q / shell,
        terms: j,
        underflow,
    })
}

/// Inverse Fourier transform of a radial multiplier `g` at a point of norm
/// `p^β` (the transform of a radial function is its own inverse up to the
/// sign of the argument, which radial functions do not see).
pub fn radial_fourier(g: &dyn RadialProfile, beta: i32, dims: PrimeDim, tol: f64) -> Result<SeriesValue> {
    NormExponent::Finite(beta).check_window()?;
    let sum = ball_sum(g, dims, -beta, tol)?;
    let edge = g.eval(NormExponent::Finite(-beta + 1))?;
    let bracket = (sum.limit - edge.value) + sum.deviation;
    let scale = |x: f64| scaled_pow(dims.p(), -(dims.n() as i64) * beta as i64, x);
    Ok(SeriesValue {
        value: scale(bracket)?.to_f64_checked()?,
        tail_bound: scale(sum.tail_bound)?.to_f64(),
        terms_used: sum.terms + 1,
        underflow: sum.underflow || edge.underflow,
    })
}

/// `ǧ(γ)` over a range of exponents, evaluated in parallel.
pub fn radial_fourier_range(
    g: &dyn RadialProfile,
    range: RangeInclusive<i32>,
    dims: PrimeDim,
    tol: f64,
) -> Result<Vec<(i32, SeriesValue)>> {
    range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|beta| radial_fourier(g, beta, dims, tol).map(|v| (beta, v)))
        .collect()
}

/// The convolution kernel `K_α` at a point `x` with `||x|| = p^γ`.
pub fn kernel_k(symbol: &BesselSymbol, gamma_x: NormExponent, tol: f64) -> Result<SeriesValue> {
    match gamma_x {
        NormExponent::Zero => Err(Error::OriginNotDefined),
        NormExponent::Finite(g) => radial_fourier(&SymbolProfile(symbol.clone()), g, symbol.dims(), tol),
    }
}

/// Total mass `K_α(Q_p^n) = |ψ1(0)|^{-α}`.
pub fn kernel_mass(symbol: &BesselSymbol) -> Result<f64> {
    symbol.at_origin()
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    /// `S` non-increasing in the norm on the checked exponents.
    pub precondition_holds: bool,
    /// First exponent `γ` with `S(p^{γ+1}) > S(p^γ)`, if any.
    pub precondition_violation: Option<i32>,
    pub checked: (i32, i32),
    pub values: Vec<(i32, SeriesValue)>,
    pub min_value: f64,
    pub argmin: Option<i32>,
    pub tol: f64,
    pub passed: bool,
}

/// Checks that `S` decreases in the norm and that `K_α ≥ −tol` on `gamma_range`.
pub fn positivity_scan(symbol: &BesselSymbol, gamma_range: RangeInclusive<i32>, tol: f64) -> Result<PositivityReport> {
    let (wlo, whi) = symbol.window();
    let lo = wlo.min(-gamma_range.end() - 1).max(-WORKING_WINDOW);
    let hi = whi.max(-gamma_range.start() + 1).min(WORKING_WINDOW);
    let mut violation = None;
    let mut prev = symbol.value(NormExponent::Zero)?.value;
    for g in lo..=hi {
        let s = symbol.value(NormExponent::Finite(g))?.value;
        if s > prev * (1.0 + 4.0 * f64::EPSILON) {
            violation = Some(g - 1);
            break;
        }
        prev = s;
    }
    let values = radial_fourier_range(&SymbolProfile(symbol.clone()), gamma_range, symbol.dims(), DEFAULT_TOL)?;
    let (argmin, min_value) = values
        .iter()
        .map(|(g, v)| (Some(*g), v.value))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((None, f64::INFINITY));
    let precondition_holds = violation.is_none();
    Ok(PositivityReport {
        precondition_holds,
        precondition_violation: violation,
        checked: (lo, hi),
        values,
        min_value,
        argmin,
        tol,
        passed: precondition_holds && min_value >= -tol,
    })
}

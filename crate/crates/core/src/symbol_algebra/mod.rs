//! Negative definite radial functions, the crossing radius, and the
//! composite Bessel symbol `S = max(|ψ1|, |ψ2|)^{-α}`.

mod parser;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic_core::{FiniteGrid, GridPoint, NormExponent, PrimeDim};

pub use parser::{parse_symbol_spec, ParseError};

/// Default scan window for the crossing radius.
pub const DEFAULT_WINDOW: RangeInclusive<i32> = -64..=64;

/// Tallest exponential tower the grammar accepts.
pub const MAX_TOWER_HEIGHT: u32 = 16;

/// Largest argument for which `exp` stays finite.
const EXP_MAX: f64 = 709.78;
/// Below this `exp` is zero even as a subnormal.
const EXP_MIN: f64 = -745.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TowerTerm {
    pub coeff: f64,
    pub degree: u32,
}

/// A non-empty map from norm exponents to values.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    entries: BTreeMap<i32, f64>,
}

impl ProfileTable {
    pub fn new(entries: impl IntoIterator<Item = (i32, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (gamma, v) in entries {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("table value at {gamma} is not finite")));
            }
            if map.insert(gamma, v).is_some() {
                return Err(Error::InvalidArgument(format!("exponent {gamma} listed twice")));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidArgument("empty table".into()));
        }
        Ok(Self { entries: map })
    }

    pub(crate) fn from_map(entries: BTreeMap<i32, f64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self { entries }
    }

    pub fn get(&self, gamma: i32) -> Option<f64> {
        self.entries.get(&gamma).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.entries.iter().map(|(&g, &v)| (g, v))
    }

    /// Value of the nearest listed exponent at or below `at`; below the
    /// smallest entry (and at the origin) the smallest entry is used.
    pub fn hold(&self, at: NormExponent) -> f64 {
        let lowest = *self.entries.values().next().expect("table is non-empty");
        match at {
            NormExponent::Zero => lowest,
            NormExponent::Finite(g) => self.entries.range(..=g).next_back().map(|(_, &v)| v).unwrap_or(lowest),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TableDefault {
    /// Extend by [`ProfileTable::hold`].
    Hold,
    /// Unlisted exponents and the origin take this value.
    Value(f64),
}

/// A radial function `ψ(||ξ||)` given by its values at `||ξ|| = p^γ`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialSpec {
    /// `c ≥ 0` everywhere.
    Constant { c: f64 },
    /// `a·||ξ||^b`.
    Power { a: f64, b: f64 },
    /// `exp∘…∘exp (height times) of Σ c_k ||ξ||^{d_k}`.
    ExpTower { height: u32, terms: Vec<TowerTerm> },
    /// `1 − Ĵ(||ξ||)`, with `Ĵ` held between listed exponents.
    OneMinusJHat { jhat: ProfileTable },
    /// Arbitrary tabulated values.
    Table { table: ProfileTable, default: TableDefault },
}

impl RadialSpec {
    /// Checks the same constraints the parser enforces.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        match self {
            RadialSpec::Constant { c } if !(c.is_finite() && *c >= 0.0) => bad("constant must be finite and >= 0"),
            RadialSpec::Power { a, b } if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) => {
                bad("power coefficients must be positive")
            }
            RadialSpec::ExpTower { height, terms } => {
                if *height == 0 || *height > MAX_TOWER_HEIGHT {
                    return bad("tower height must be in 1..=16");
                }
                if terms.iter().any(|t| !(t.coeff.is_finite() && t.coeff >= 0.0) || t.degree == 0) {
                    return bad("tower terms need c >= 0 and degree >= 1");
                }
                if terms.iter().all(|t| t.coeff == 0.0) {
                    return bad("tower needs a positive coefficient");
                }
                Ok(())
            }
            RadialSpec::OneMinusJHat { jhat } if jhat.iter().any(|(_, v)| !(-1.0..=1.0).contains(&v)) => {
                bad("Ĵ values must lie in [-1, 1]")
            }
            RadialSpec::Table { default: TableDefault::Value(v), .. } if !v.is_finite() => {
                bad("table default must be finite")
            }
            _ => Ok(()),
        }
    }

    /// `true` for families whose magnitude is non-decreasing by construction.
    pub fn is_monotone_family(&self) -> bool {
        matches!(self, RadialSpec::Constant { .. } | RadialSpec::Power { .. } | RadialSpec::ExpTower { .. })
    }
}

impl std::str::FromStr for RadialSpec {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        parse_symbol_spec(s)
    }
}

fn write_entries(f: &mut fmt::Formatter<'_>, table: &ProfileTable) -> fmt::Result {
    for (i, (g, v)) in table.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{g}:{v}")?;
    }
    Ok(())
}

/// Canonical text form, accepted back by [`parse_symbol_spec`].
impl fmt::Display for RadialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialSpec::Constant { c } => write!(f, "const:{c}"),
            RadialSpec::Power { a, b } => write!(f, "power:a={a},b={b}"),
            RadialSpec::ExpTower { height, terms } => {
                write!(f, "tower:j={height};terms=")?;
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{}*y^{}", t.coeff, t.degree)?;
                }
                Ok(())
            }
            RadialSpec::OneMinusJHat { jhat } => {
                f.write_str("oneminusjhat:table=")?;
                write_entries(f, jhat)
            }
            RadialSpec::Table { table, default } => {
                f.write_str("table:")?;
                write_entries(f, table)?;
                match default {
                    TableDefault::Hold => f.write_str(";default=hold"),
                    TableDefault::Value(v) => write!(f, ";default={v}"),
                }
            }
        }
    }
}

/// `log|ψ|`, possibly far beyond binary64 range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LogMagnitude {
    /// `ψ = 0`.
    NegInfinity,
    Finite(f64),
    /// `log|ψ| = exp^{height}(innermost)` with `height ≥ 1`.
    Huge {
        height: u32,
        innermost: f64,
    },
}

impl LogMagnitude {
    /// `|ψ|` as a float, saturating to infinity.
    pub fn magnitude(&self) -> f64 {
        match *self {
            LogMagnitude::NegInfinity => 0.0,
            LogMagnitude::Finite(l) => l.exp(),
            LogMagnitude::Huge { .. } => f64::INFINITY,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LogMagnitude::NegInfinity)
    }

    fn rank(&self) -> u8 {
        match self {
            LogMagnitude::NegInfinity => 0,
            LogMagnitude::Finite(_) => 1,
            LogMagnitude::Huge { .. } => 2,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other.partial_cmp(&self) == Some(Ordering::Greater) {
            other
        } else {
            self
        }
    }
}

impl PartialOrd for LogMagnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use LogMagnitude::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Huge { height: h1, innermost: a }, Huge { height: h2, innermost: b }) => match h1.cmp(h2) {
                Ordering::Equal => a.partial_cmp(b),
                o => Some(o),
            },
            _ => Some(self.rank().cmp(&other.rank())),
        }
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn from_value(v: f64) -> LogMagnitude {
    if v == 0.0 {
        LogMagnitude::NegInfinity
    } else {
        LogMagnitude::Finite(v.abs().ln())
    }
}

/// `log|ψ(p^γ)|`, or `log|ψ(0)|` at [`NormExponent::Zero`].
pub fn eval_abs_psi(spec: &RadialSpec, dims: PrimeDim, at: NormExponent) -> Result<LogMagnitude> {
    at.check_window()?;
    let ln_p = (dims.p() as f64).ln();
    Ok(match spec {
        RadialSpec::Constant { c } => from_value(*c),
        RadialSpec::Power { a, b } => match at {
            NormExponent::Zero => LogMagnitude::NegInfinity,
            NormExponent::Finite(g) => LogMagnitude::Finite(a.ln() + b * g as f64 * ln_p),
        },
        RadialSpec::ExpTower { height, terms } => {
            // log ψ0 first, then exponentiate while it stays representable
            let mut v = match at {
                NormExponent::Zero => f64::NEG_INFINITY,
                NormExponent::Finite(g) => log_sum_exp(
                    terms.iter().filter(|t| t.coeff > 0.0).map(|t| t.coeff.ln() + t.degree as f64 * g as f64 * ln_p),
                ),
            };
            let mut remaining = *height;
            while remaining > 0 && v <= EXP_MAX {
                v = v.exp();
                remaining -= 1;
            }
            if remaining == 0 {
                LogMagnitude::Finite(v)
            } else {
                LogMagnitude::Huge { height: remaining, innermost: v }
            }
        }
        RadialSpec::OneMinusJHat { .. } | RadialSpec::Table { .. } => from_value(psi_value(spec, dims, at)?),
    })
}

/// Signed value `ψ(p^γ)`; saturates to infinity for towers.
pub fn psi_value(spec: &RadialSpec, dims: PrimeDim, at: NormExponent) -> Result<f64> {
    at.check_window()?;
    Ok(match spec {
        RadialSpec::Constant { c } => *c,
        RadialSpec::Power { a, b } => match at {
            NormExponent::Zero => 0.0,
            NormExponent::Finite(g) => a * (dims.p() as f64).powf(b * g as f64),
        },
        RadialSpec::ExpTower { .. } => eval_abs_psi(spec, dims, at)?.magnitude(),
        RadialSpec::OneMinusJHat { jhat } => 1.0 - jhat.hold(at),
        RadialSpec::Table { table, default } => match (default, at) {
            (TableDefault::Hold, _) => table.hold(at),
            (TableDefault::Value(v), NormExponent::Zero) => *v,
            (TableDefault::Value(v), NormExponent::Finite(g)) => table.get(g).unwrap_or(*v),
        },
    })
}

/// Finds `r` such that `|ψ1(p^γ)| ≥ |ψ2(p^γ)|` exactly for `γ ≤ r` on the window.
pub fn crossing_radius(
    psi1: &RadialSpec,
    psi2: &RadialSpec,
    dims: PrimeDim,
    window: RangeInclusive<i32>,
) -> Result<i32> {
    let (lo, hi) = (*window.start(), *window.end());
    if lo > hi {
        return Err(Error::InvalidArgument(format!("empty window {lo}..{hi}")));
    }
    let holds = |at: NormExponent| -> Result<bool> {
        let l1 = eval_abs_psi(psi1, dims, at)?;
        // the origin is not part of the scanned window
        if l1.is_zero() && at != NormExponent::Zero {
            return Err(Error::Psi1Vanishes { at: at.to_string() });
        }
        let l2 = eval_abs_psi(psi2, dims, at)?;
        Ok(l1.partial_cmp(&l2).is_some_and(|o| o != Ordering::Less))
    };
    if !holds(NormExponent::Zero)? {
        return Err(Error::HypothesisAViolation { reason: "|psi1| < |psi2| at the origin".into() });
    }
    let flags = window.clone().map(|g| holds(NormExponent::Finite(g))).collect::<Result<Vec<bool>>>()?;
    let first_false = match flags.iter().position(|f| !f) {
        None => {
            return Err(Error::HypothesisAViolation {
                reason: format!("|psi1| >= |psi2| on the whole window {lo}..{hi}; no crossing"),
            })
        }
        Some(0) => {
            return Err(Error::HypothesisAViolation {
                reason: format!("|psi1| < |psi2| on the whole window {lo}..{hi}"),
            })
        }
        Some(i) => i,
    };
    if let Some(k) = flags[first_false..].iter().position(|&f| f) {
        return Err(Error::HypothesisAViolation {
            reason: format!(
                "predicate is not downward closed: false at {} but true at {}",
                lo + first_false as i32,
                lo + (first_false + k) as i32
            ),
        });
    }
    Ok(lo + first_false as i32 - 1)
}

/// Summary of the Hypothesis A scan, for display.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub window: (i32, i32),
    pub crossing_radius: Option<i32>,
    pub violation: Option<String>,
    pub psi1_at_origin: LogMagnitude,
    pub psi2_at_origin: LogMagnitude,
}

pub fn hypothesis_a_report(
    psi1: &RadialSpec,
    psi2: &RadialSpec,
    dims: PrimeDim,
    window: RangeInclusive<i32>,
) -> Result<HypothesisReport> {
    let w = (*window.start(), *window.end());
    let (crossing, violation) = match crossing_radius(psi1, psi2, dims, window) {
        Ok(r) => (Some(r), None),
        Err(e @ (Error::HypothesisAViolation { .. } | Error::Psi1Vanishes { .. })) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(HypothesisReport {
        window: w,
        crossing_radius: crossing,
        violation,
        psi1_at_origin: eval_abs_psi(psi1, dims, NormExponent::Zero)?,
        psi2_at_origin: eval_abs_psi(psi2, dims, NormExponent::Zero)?,
    })
}

/// A value of `S`, with `underflow` set when it was flushed to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolValue {
    pub value: f64,
    pub underflow: bool,
}

/// `exp(−α·l)` for a log-magnitude `l`.
fn exp_neg_alpha(alpha: f64, l: LogMagnitude, at: NormExponent) -> Result<SymbolValue> {
    match l {
        LogMagnitude::NegInfinity => Err(Error::Psi1Vanishes { at: at.to_string() }),
        LogMagnitude::Huge { .. } => Ok(SymbolValue { value: 0.0, underflow: true }),
        LogMagnitude::Finite(l) => {
            let x = -alpha * l;
            if x > EXP_MAX {
                return Err(Error::WindowExceeded {
                    exponent: at.finite().unwrap_or(0) as i64,
                    limit: crate::padic_core::WORKING_WINDOW as i64,
                });
            }
            if x < EXP_MIN {
                return Ok(SymbolValue { value: 0.0, underflow: true });
            }
            let value = x.exp();
            Ok(SymbolValue { value, underflow: value == 0.0 })
        }
    }
}

/// The Bessel symbol of a validated pair `(ψ1, ψ2)` and order `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselSymbol {
    psi1: RadialSpec,
    psi2: RadialSpec,
    alpha: f64,
    dims: PrimeDim,
    radius: i32,
    window: (i32, i32),
}

impl BesselSymbol {
    pub fn new(psi1: RadialSpec, psi2: RadialSpec, alpha: f64, dims: PrimeDim) -> Result<Self> {
        Self::with_window(psi1, psi2, alpha, dims, DEFAULT_WINDOW)
    }

    pub fn with_window(
        psi1: RadialSpec,
        psi2: RadialSpec,
        alpha: f64,
        dims: PrimeDim,
        window: RangeInclusive<i32>,
    ) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        psi1.validate()?;
        psi2.validate()?;
        let w = (*window.start(), *window.end());
        let radius = crossing_radius(&psi1, &psi2, dims, window)?;
        Ok(Self { psi1, psi2, alpha, dims, radius, window: w })
    }

    /// Parses both specs and validates.
    pub fn parse(psi1: &str, psi2: &str, alpha: f64, dims: PrimeDim) -> Result<Self> {
        Self::new(parse_symbol_spec(psi1)?, parse_symbol_spec(psi2)?, alpha, dims)
    }

    /// Same pair at another order; the crossing radius does not depend on `α`.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { alpha, ..self.clone() })
    }

    pub fn psi1(&self) -> &RadialSpec {
        &self.psi1
    }

    pub fn psi2(&self) -> &RadialSpec {
        &self.psi2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dims(&self) -> PrimeDim {
        self.dims
    }

    pub fn crossing_radius(&self) -> i32 {
        self.radius
    }

    pub fn window(&self) -> (i32, i32) {
        self.window
    }

    /// `max(log|ψ1|, log|ψ2|)`.
    pub fn log_max(&self, at: NormExponent) -> Result<LogMagnitude> {
        let l1 = eval_abs_psi(&self.psi1, self.dims, at)?;
        let l2 = eval_abs_psi(&self.psi2, self.dims, at)?;
        Ok(l1.max(l2))
    }

    /// `S(p^γ) = exp(−α·max(log|ψ1|, log|ψ2|))`.
    pub fn value(&self, at: NormExponent) -> Result<SymbolValue> {
        exp_neg_alpha(self.alpha, self.log_max(at)?, at)
    }

    /// `|ψ1|^{-α}` inside the ball of radius `p^r`, `|ψ2|^{-α}` outside.
    pub fn branch_value(&self, at: NormExponent) -> Result<SymbolValue> {
        let inside = match at {
            NormExponent::Zero => true,
            NormExponent::Finite(g) => g <= self.radius,
        };
        let spec = if inside { &self.psi1 } else { &self.psi2 };
        exp_neg_alpha(self.alpha, eval_abs_psi(spec, self.dims, at)?, at)
    }

    /// `S(0) = |ψ1(0)|^{-α}`.
    pub fn at_origin(&self) -> Result<f64> {
        Ok(self.value(NormExponent::Zero)?.value)
    }
}

impl fmt::Display for BesselSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S[{}, {}; alpha={}; {}]", self.psi1, self.psi2, self.alpha, self.dims)
    }
}

/// `S(p^γ)` as a bare float.
pub fn symbol_s(symbol: &BesselSymbol, at: NormExponent) -> Result<f64> {
    Ok(symbol.value(at)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegDefWitness {
    /// Grid coordinates of the sampled points.
    pub points: Vec<Vec<u64>>,
    /// `(re, im)` of each coefficient.
    pub lambdas: Vec<(f64, f64)>,
    pub form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegDefReport {
    pub trials: usize,
    /// Trials whose ψ values were not all finite.
    pub skipped: usize,
    pub min_form: f64,
    pub tol: f64,
    pub passed: bool,
    pub witness: Option<NegDefWitness>,
}

/// Random spot check of negative definiteness of `x ↦ ψ(||x||)` on a grid.
pub fn negdef_sample_check(
    spec: &RadialSpec,
    grid: &FiniteGrid,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<NegDefReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let dims = grid.dims();
    let q = grid.modulus();
    let outcomes: Vec<Option<NegDefWitness>> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<Option<NegDefWitness>> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let m = rng.gen_range(1..=6usize);
            let pts: Vec<_> =
                (0..m).map(|_| grid.from_coords((0..dims.n()).map(|_| rng.gen_range(0..q)).collect())).collect();
            let mut lambdas: Vec<Complex64> =
                (0..m).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let norm = lambdas.iter().map(|l| l.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                lambdas.iter_mut().for_each(|l| *l /= norm);
            }
            let psi = |x: &GridPoint| psi_value(spec, dims, grid.norm_exponent(x));
            let single = pts.iter().map(&psi).collect::<Result<Vec<f64>>>()?;
            let mut form = Complex64::new(0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    let diff = psi(&grid.sub(&pts[i], &pts[j]))?;
                    let c = single[i] + single[j] - diff;
                    form += c * lambdas[i] * lambdas[j].conj();
                }
            }
            if !form.re.is_finite() {
                return Ok(None);
            }
            Ok(Some(NegDefWitness {
                points: pts.iter().map(|x| x.coords().to_vec()).collect(),
                lambdas: lambdas.iter().map(|l| (l.re, l.im)).collect(),
                form: form.re,
            }))
        })
        .collect::<Result<_>>()?;
    let skipped = outcomes.iter().filter(|o| o.is_none()).count();
    let worst = outcomes.into_iter().flatten().min_by(|a, b| a.form.total_cmp(&b.form));
    let min_form = worst.as_ref().map_or(f64::INFINITY, |w| w.form);
    let passed = min_form >= -tol;
    Ok(NegDefReport { trials, skipped, min_form, tol, passed, witness: if passed { None } else { worst } })
}

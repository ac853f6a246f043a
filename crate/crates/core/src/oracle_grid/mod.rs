//! Brute-force evaluation by character sums over finite quotient groups.
//!
//! Nothing in here calls the radial series engine. Values are obtained by
//! summing `χ_p(−x·ξ) m(||ξ||)` over the points of a [`FiniteGrid`] using only
//! digit arithmetic and roots of unity, so agreement with the series is
//! evidence rather than a restatement.

mod dft;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic_core::{
    frac_part, root_of_unity, unit_sphere_char_integral, CompensatedSum, FiniteGrid, GridPoint, NormExponent,
    PadicRational, PadicVector, PrimeDim, SeriesValue,
};
use crate::radial_transform::RadialProfile;

pub use dft::{grid_dft, grid_dft_factored, Direction};

/// Shells above the grid that are summed explicitly.
pub const OUTER_SHELLS: i32 = 16;

/// How far below `p^{-N}` the multiplier is probed for the resolution error.
const RESOLUTION_PROBE: i32 = 64;

/// `exp(2πi r / q)` for residues `r`, tabulated when `q` is small.
pub(crate) struct Roots {
    q: u64,
    table: Option<Vec<Complex64>>,
}

impl Roots {
    pub(crate) fn new(q: u64) -> Self {
        let table = (q <= 1 << 20).then(|| (0..q).map(|r| root_of_unity(r as i128, q as i128)).collect());
        Self { q, table }
    }

    pub(crate) fn get(&self, r: u64) -> Complex64 {
        match &self.table {
            Some(t) => t[(r % self.q) as usize],
            None => root_of_unity(r as i128, self.q as i128),
        }
    }

    /// `exp(−2πi r / q)`.
    pub(crate) fn get_neg(&self, r: u64) -> Complex64 {
        self.get((self.q - r % self.q) % self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleMode {
    /// One term per grid point.
    Direct,
    /// Per-axis ball sums, one term per shell.
    Factored,
    /// `Direct` when the grid fits the point budget, else `Factored`.
    Auto,
}

/// An oracle value and the pieces of its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleValue {
    pub value: Complex64,
    /// Bound on the error from treating the cell `p^N Z_p^n` as one point.
    pub resolution_error: f64,
    /// Floating point error estimate of the summation.
    pub rounding: f64,
    /// Contribution of the shells `p^{M+1} … p^{M+16}` (already in `value`).
    pub outer_shells: f64,
    /// `resolution_error + rounding`.
    pub estimate: f64,
    pub mode: OracleMode,
}

fn profile_at(m: &dyn RadialProfile, at: NormExponent) -> Result<f64> {
    let v = m.eval(at)?.value;
    if !v.is_finite() {
        return Err(Error::TailNotControlled { reason: format!("{} is not finite at {at}", m.describe()) });
    }
    Ok(v)
}

/// `Σ_ξ χ_p(−x·ξ) m(||ξ||) p^{-nN}` over `ξ ∈ grid`, plus the shells just
/// outside it, for `x ≠ 0` on the dual grid.
pub fn oracle_kernel_value(
    m: &dyn RadialProfile,
    x: &GridPoint,
    grid: &FiniteGrid,
    mode: OracleMode,
) -> Result<OracleValue> {
    let dims = grid.dims();
    let dual = grid.dual();
    let gamma = match dual.norm_exponent(x) {
        NormExponent::Zero => return Err(Error::OriginNotDefined),
        NormExponent::Finite(g) => g,
    };
    let (big_m, big_n) = (grid.outer() as i32, grid.resolution() as i32);
    let m0 = profile_at(m, NormExponent::Zero)?;
    // m on the shells p^k, k = −N+1 ..= M, index k + N
    let shells = (-big_n + 1..=big_m).map(|k| profile_at(m, NormExponent::Finite(k))).collect::<Result<Vec<f64>>>()?;
    let shell = |k: i32| if k <= -big_n { m0 } else { shells[(k + big_n - 1) as usize] };

    let mode = match mode {
        OracleMode::Auto if grid.point_count() <= grid.budget() => OracleMode::Direct,
        OracleMode::Auto => OracleMode::Factored,
        other => other,
    };
    let eps = f64::EPSILON;
    let (mut value, rounding) = match mode {
        OracleMode::Direct => {
            grid.ensure_enumerable()?;
            let roots = Roots::new(grid.modulus());
            let w = grid.weight();
            // compensated, so the error does not grow with the number of points
            let (re, im, abs) = (0..grid.len())
                .into_par_iter()
                .fold(
                    || (CompensatedSum::default(), CompensatedSum::default(), 0.0),
                    |(mut re, mut im, abs), i| {
                        let xi = grid.point(i);
                        let mv = match grid.norm_exponent(&xi) {
                            NormExponent::Zero => m0,
                            NormExponent::Finite(k) => shell(k),
                        };
                        let term = roots.get_neg(grid.pairing_residue(&xi, x)) * (mv * w);
                        re.add(term.re);
                        im.add(term.im);
                        (re, im, abs + (mv * w).abs())
                    },
                )
                .map(|(re, im, abs)| (Complex64::new(re.value(), im.value()), abs))
                .collect::<Vec<_>>()
                .into_iter()
                .fold((CompensatedSum::default(), CompensatedSum::default(), 0.0), |(mut re, mut im, a), (v, b)| {
                    re.add(v.re);
                    im.add(v.im);
                    (re, im, a + b)
                });
            (Complex64::new(re.value(), im.value()), 8.0 * eps * abs)
        }
        OracleMode::Factored | OracleMode::Auto => factored_sum(grid, x, m0, &shell)?,
    };

    // ||ξ|| = p^k with k > M: the shell integral is U(k + γ) p^{nk}, which
    // vanishes once k + γ ≥ 2
    let mut outer = 0.0;
    for k in big_m + 1..=big_m + OUTER_SHELLS {
        let u = unit_sphere_char_integral(k + gamma, dims);
        if u != 0.0 {
            outer += u * dims.p_pow_n(k as i64) * profile_at(m, NormExponent::Finite(k))?;
        }
    }
    if 1 - gamma > big_m + OUTER_SHELLS {
        return Err(Error::TailNotControlled {
            reason: format!("grid with M = {big_m} is too small for a point of norm p^{gamma}"),
        });
    }
    value += outer;

    let mut sup_dev: f64 = 0.0;
    for k in -big_n - RESOLUTION_PROBE..=-big_n {
        if k < -crate::padic_core::WORKING_WINDOW {
            break;
        }
        sup_dev = sup_dev.max((profile_at(m, NormExponent::Finite(k))? - m0).abs());
    }
    let resolution_error = grid.weight() * sup_dev;
    Ok(OracleValue {
        value,
        resolution_error,
        rounding,
        outer_shells: outer,
        estimate: resolution_error + rounding,
        mode,
    })
}

/// `B(k) = Σ_{ξ ∈ grid, ||ξ|| ≤ p^k} χ(−x·ξ) w` factors into per-axis sums over
/// `Ξ_i = p^{M−k} t`, `0 ≤ t < p^{N+k}`.
fn factored_sum(grid: &FiniteGrid, x: &GridPoint, m0: f64, shell: &dyn Fn(i32) -> f64) -> Result<(Complex64, f64)> {
    let dims = grid.dims();
    let p = dims.p() as u64;
    let (big_m, big_n) = (grid.outer() as i32, grid.resolution() as i32);
    let q = grid.modulus();
    let roots = Roots::new(q);
    let w = grid.weight();
    let ball = |k: i32| -> Complex64 {
        let step = p.pow((big_m - k) as u32);
        let count = p.pow((big_n + k) as u32);
        let prod = x.coords().iter().fold(Complex64::new(1.0, 0.0), |acc, &xc| {
            let stride = ((xc as u128 * step as u128) % q as u128) as u64;
            let mut s = Complex64::new(0.0, 0.0);
            let mut r = 0u64;
            for _ in 0..count {
                s += roots.get_neg(r);
                r = ((r as u128 + stride as u128) % q as u128) as u64;
            }
            acc * s
        });
        prod * w
    };
    let mut total = ball(-big_n) * m0;
    let mut abs = (m0 * w).abs();
    let mut prev = ball(-big_n);
    for k in -big_n + 1..=big_m {
        let b = ball(k);
        let mk = shell(k);
        total += (b - prev) * mk;
        abs += mk.abs() * dims.p_pow_n(k as i64);
        prev = b;
    }
    let n = dims.n() as f64;
    Ok((total, 8.0 * n * f64::EPSILON * abs * (q as f64).log2().max(1.0)))
}

/// The grid used to check a kernel at `||x|| = p^γ`: `M = max(1 − γ, 0)`
/// and `N = max(γ, 0) + refine`, with `x = p^{-γ} e_1` on the dual grid.
pub fn oracle_setup(dims: PrimeDim, gamma: i32, refine: u32) -> Result<(FiniteGrid, GridPoint)> {
    let big_m = (1 - gamma).max(0) as u32;
    let big_n = gamma.max(0) as u32 + refine;
    let grid = FiniteGrid::new(dims, big_m, big_n)?;
    let x = point_with_norm(&grid.dual(), gamma)?;
    Ok((grid, x))
}

/// `p^{-γ} e_1` as a point of `grid`, if representable and nonzero.
pub fn point_with_norm(grid: &FiniteGrid, gamma: i32) -> Result<GridPoint> {
    let v = PadicVector::with_norm(grid.dims(), gamma);
    match grid.from_vector(&v) {
        Some(x) if grid.norm_exponent(&x) == NormExponent::Finite(gamma) => Ok(x),
        _ => Err(Error::InvalidArgument(format!(
            "no point of norm p^{gamma} on the grid with M = {}, N = {}",
            grid.outer(),
            grid.resolution()
        ))),
    }
}

/// `∫_{||z|| = 1} χ_p(−p^{-j} x₀·z) dz` by summing over `Z_p^n / p^N Z_p^n`.
/// Needs `N ≥ j` so that the character is constant on cells.
pub fn sphere_character_sum(dims: PrimeDim, j: i32, x0: &PadicVector, resolution: u32) -> Result<f64> {
    if x0.norm_exponent() != NormExponent::Finite(0) || x0.dim() != dims.n() as usize {
        return Err(Error::InvalidArgument("x0 must have norm 1".into()));
    }
    if (resolution as i32) < j {
        return Err(Error::InvalidArgument(format!("resolution {resolution} is too coarse for j = {j}")));
    }
    let grid = FiniteGrid::new(dims, 0, resolution)?;
    grid.ensure_enumerable()?;
    let scale = PadicRational::prime_power(dims.p(), -j);
    let w = grid.weight();
    let sum: Complex64 = grid
        .points()
        .filter(|z| grid.norm_exponent(z) == NormExponent::Finite(0))
        .map(|z| {
            let dot = grid.to_vector(&z).dot(x0).mul(&scale).neg();
            let f = frac_part(&dot);
            root_of_unity(*f.numer(), *f.denom()) * w
        })
        .sum();
    Ok(sum.re)
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseComparison {
    pub case: String,
    pub series: Option<SeriesValue>,
    pub oracle: Option<OracleValue>,
    pub diff: f64,
    pub allowed: f64,
    /// `allowed − diff`; negative on failure.
    pub margin: f64,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub cases: Vec<CaseComparison>,
    pub passed: bool,
    pub worst_margin: f64,
}

/// Slack added to every comparison on top of the declared bounds.
pub const COMPARE_SLACK: f64 = 1e-9;

/// Compares a series evaluator with an oracle on every input:
/// `|series − oracle| ≤ tail_bound + oracle estimate + 1e-9`.
pub fn compare_suite<I, L, S, O>(inputs: &[I], label: L, series: S, oracle: O) -> ComparisonReport
where
    I: Sync,
    L: Fn(&I) -> String + Sync,
    S: Fn(&I) -> Result<SeriesValue> + Sync,
    O: Fn(&I) -> Result<OracleValue> + Sync,
{
    let cases: Vec<CaseComparison> = inputs
        .par_iter()
        .map(|input| {
            let case = label(input);
            match (series(input), oracle(input)) {
                (Ok(s), Ok(o)) => {
                    let diff = (Complex64::new(s.value, 0.0) - o.value).norm();
                    let allowed = s.tail_bound + o.estimate + COMPARE_SLACK;
                    let margin = allowed - diff;
                    CaseComparison {
                        case,
                        series: Some(s),
                        oracle: Some(o),
                        diff,
                        allowed,
                        margin,
                        pass: margin >= 0.0,
                        error: None,
                    }
                }
                (s, o) => CaseComparison {
                    case,
                    error: Some(
                        [s.err(), o.err()].into_iter().flatten().map(|e| e.to_string()).collect::<Vec<_>>().join("; "),
                    ),
                    series: None,
                    oracle: None,
                    diff: f64::NAN,
                    allowed: f64::NAN,
                    margin: f64::NEG_INFINITY,
                    pass: false,
                },
            }
        })
        .collect();
    let worst_margin = cases.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    ComparisonReport { passed: cases.iter().all(|c| c.pass), cases, worst_margin }
}

//! The family `(K_α)_{α>0}` as a convolution semigroup of measures: the
//! multiplier identity, grid convolution, total mass and the limit `α → 0`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle_grid::point_with_norm;
use crate::padic_core::{FiniteGrid, NormExponent, PadicVector};
use crate::radial_transform::{
    apply_operator, ball_sum, kernel_k, kernel_mass, positivity_scan, PositivityReport, SymbolProfile, TestFunction,
    DEFAULT_TOL,
};
use crate::symbol_algebra::{psi_value, BesselSymbol};

/// Largest grid the convolution will accept.
pub const CONVOLUTION_BUDGET: u128 = 100_000;

/// Rounding allowance for sums of a few thousand terms of size about one.
const ROUNDING: f64 = 1e-12;

/// `(f ∗ g)(x) = Σ_y f(y) g(x − y) w` on `grid`, in index order.
pub fn grid_convolution(f: &[Complex64], g: &[Complex64], grid: &FiniteGrid) -> Result<Vec<Complex64>> {
    grid.ensure_enumerable()?;
    if grid.point_count() > CONVOLUTION_BUDGET {
        return Err(Error::BudgetExceeded { points: grid.point_count(), budget: CONVOLUTION_BUDGET });
    }
    if f.len() != grid.len() || g.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "convolution of {} and {} values on a grid of {} points",
            f.len(),
            g.len(),
            grid.len()
        )));
    }
    let w = grid.weight();
    let points: Vec<_> = grid.points().collect();
    Ok(points
        .par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (y, fy) in points.iter().zip(f) {
                if *fy != Complex64::new(0.0, 0.0) {
                    acc += fy * g[grid.index_of(&grid.sub(x, y))];
                }
            }
            acc * w
        })
        .collect())
}

/// `K_α` sampled on a grid. The origin carries the cell mass
/// `∫_{||x|| ≤ p^{-N}} K_α` divided by the weight, so that sums against
/// functions constant on cells are exact.
#[derive(Debug, Clone)]
pub struct GridKernel {
    pub values: Vec<f64>,
    /// Per-point bound on the error of `values`.
    pub bounds: Vec<f64>,
    /// Bound on `∫ |K_α|` over `p^M < ||x|| ≤ p^{M+16}`, which the grid drops.
    pub outside: f64,
}

pub fn kernel_on_grid(symbol: &BesselSymbol, grid: &FiniteGrid, tol: f64) -> Result<GridKernel> {
    let dims = symbol.dims();
    if grid.dims() != dims {
        return Err(Error::InvalidArgument("grid and symbol disagree on Q_p^n".into()));
    }
    grid.ensure_enumerable()?;
    let (m, n) = (grid.outer() as i32, grid.resolution() as i32);
    let w = grid.weight();
    let cell = ball_sum(&SymbolProfile(symbol.clone()), dims, n, tol)?;
    let shells = (-n + 1..=m).map(|g| kernel_k(symbol, NormExponent::Finite(g), tol)).collect::<Result<Vec<_>>>()?;
    let (mut values, mut bounds) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for x in grid.points() {
        match grid.norm_exponent(&x) {
            NormExponent::Zero => {
                values.push(cell.value / w);
                bounds.push(cell.tail_bound / w);
            }
            NormExponent::Finite(g) => {
                let v = shells[(g + n - 1) as usize];
                values.push(v.value);
                bounds.push(v.tail_bound);
            }
        }
    }
    let mut outside = 0.0;
    for g in m + 1..=m + 16 {
        let v = kernel_k(symbol, NormExponent::Finite(g), tol)?;
        outside += (v.value.abs() + v.tail_bound) * dims.sphere_measure() * dims.p_pow_n(g as i64);
    }
    Ok(GridKernel { values, bounds, outside })
}

#[derive(Debug, Clone, Serialize)]
pub struct SemigroupRow {
    pub gamma: i32,
    pub convolved: f64,
    pub target: f64,
    pub residual: f64,
    pub allowed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SemigroupReport {
    pub alpha1: f64,
    pub alpha2: f64,
    /// `max |S_{α1} S_{α2} − S_{α1+α2}|` over the exponents and the origin.
    pub fourier_residual: f64,
    pub rows: Vec<SemigroupRow>,
    pub physical_residual: f64,
    pub passed: bool,
}

/// Tolerance for the multiplier identity.
pub const FOURIER_TOL: f64 = 1e-14;

/// `K_{α1} ∗ K_{α2} = K_{α1+α2}`, checked on the multiplier side at every `γ`
/// of `gamma_set` and on the grid at the points of norm `p^γ`.
pub fn symbol_semigroup_identity(
    base: &BesselSymbol,
    alpha1: f64,
    alpha2: f64,
    gamma_set: &[i32],
    grid: &FiniteGrid,
) -> Result<SemigroupReport> {
    if !(alpha1 > 0.0 && alpha2 > 0.0) {
        return Err(Error::InvalidArgument("both exponents must be positive".into()));
    }
    let (s1, s2, s12) = (base.with_alpha(alpha1)?, base.with_alpha(alpha2)?, base.with_alpha(alpha1 + alpha2)?);
    let mut fourier_residual: f64 = 0.0;
    let ats = std::iter::once(NormExponent::Zero).chain(gamma_set.iter().map(|&g| NormExponent::Finite(g)));
    for at in ats {
        let lhs = s1.value(at)?.value * s2.value(at)?.value;
        fourier_residual = fourier_residual.max((lhs - s12.value(at)?.value).abs());
    }

    let k1 = kernel_on_grid(&s1, grid, DEFAULT_TOL)?;
    let k2 = kernel_on_grid(&s2, grid, DEFAULT_TOL)?;
    let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
    let abs = |v: &[f64]| v.iter().map(|&x| Complex64::new(x.abs(), 0.0)).collect::<Vec<_>>();
    let conv = grid_convolution(&c(&k1.values), &c(&k2.values), grid)?;
    // |f̃ g̃ − f g| ≤ |f| e_g + e_f |g| + e_f e_g, summed by the same convolution
    let e1 = grid_convolution(&abs(&k1.values), &c(&k2.bounds), grid)?;
    let e2 = grid_convolution(&c(&k1.bounds), &abs(&k2.values), grid)?;
    let e3 = grid_convolution(&c(&k1.bounds), &c(&k2.bounds), grid)?;
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let dropped = k1.outside * sup(&k2.values) + k2.outside * sup(&k1.values);

    let rows = gamma_set
        .iter()
        .map(|&g| -> Result<SemigroupRow> {
            let i = grid.index_of(&point_with_norm(grid, g)?);
            let target = kernel_k(&s12, NormExponent::Finite(g), DEFAULT_TOL)?;
            let convolved = conv[i].re;
            let residual = (convolved - target.value).abs();
            let allowed = e1[i].re + e2[i].re + e3[i].re + dropped + target.tail_bound + ROUNDING;
            Ok(SemigroupRow { gamma: g, convolved, target: target.value, residual, allowed, pass: residual <= allowed })
        })
        .collect::<Result<Vec<_>>>()?;
    let physical_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(SemigroupReport {
        alpha1,
        alpha2,
        fourier_residual,
        passed: fourier_residual <= FOURIER_TOL && rows.iter().all(|r| r.pass),
        rows,
        physical_residual,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridMass {
    pub mass: f64,
    /// Series tail bounds plus the dropped outer shells.
    pub estimate: f64,
}

/// `Σ_x K_α(x) w` over the grid, with the origin cell integrated exactly.
pub fn kernel_grid_mass(symbol: &BesselSymbol, grid: &FiniteGrid, tol: f64) -> Result<GridMass> {
    let k = kernel_on_grid(symbol, grid, tol)?;
    let w = grid.weight();
    Ok(GridMass {
        mass: k.values.iter().sum::<f64>() * w,
        estimate: k.bounds.iter().sum::<f64>() * w + k.outside + ROUNDING,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbabilityVerdict {
    pub mass: f64,
    pub psi1_at_origin: f64,
    pub is_sub_probability: bool,
    pub is_probability: bool,
    pub positivity: PositivityReport,
}

/// Exponents scanned for the sign of `K_α` by [`probability_verdict`].
pub const VERDICT_RANGE: std::ops::RangeInclusive<i32> = -10..=10;

pub fn probability_verdict(symbol: &BesselSymbol) -> Result<ProbabilityVerdict> {
    let psi1_0 = psi_value(symbol.psi1(), symbol.dims(), NormExponent::Zero)?.abs();
    Ok(ProbabilityVerdict {
        mass: kernel_mass(symbol)?,
        psi1_at_origin: psi1_0,
        is_sub_probability: psi1_0 >= 1.0,
        is_probability: (psi1_0 - 1.0).abs() <= 1e-12,
        positivity: positivity_scan(symbol, VERDICT_RANGE, 1e-12)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaLimitReport {
    /// `(α, sup_x |A^α φ(x) − φ(x)|)` in the order given.
    pub rows: Vec<(f64, f64)>,
    /// Non-increasing up to `1e-10`.
    pub non_increasing: bool,
    pub strictly_decreasing: bool,
}

/// `A^α φ → φ` as `α → 0`, measured on `samples`.
pub fn delta_limit_scan(
    symbol: &BesselSymbol,
    phi: &TestFunction,
    alphas: &[f64],
    samples: &[PadicVector],
) -> Result<DeltaLimitReport> {
    if alphas.iter().any(|&a| a.is_nan() || a <= 0.0) || alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("alphas must be positive and strictly decreasing".into()));
    }
    let rows = alphas
        .iter()
        .map(|&a| -> Result<(f64, f64)> {
            let m = SymbolProfile(symbol.with_alpha(a)?);
            let mut dev: f64 = 0.0;
            for x in samples {
                dev = dev.max((apply_operator(&m, phi, x, DEFAULT_TOL)? - phi.eval(x)).norm());
            }
            Ok((a, dev))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DeltaLimitReport {
        non_increasing: rows.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-10),
        strictly_decreasing: rows.windows(2).all(|w| w[1].1 < w[0].1),
        rows,
    })
}

/// Every point of the grid as a vector, for use as a sample set.
pub fn grid_samples(grid: &FiniteGrid) -> Result<Vec<PadicVector>> {
    grid.ensure_enumerable()?;
    Ok(grid.points().map(|x| grid.to_vector(&x)).collect())
}

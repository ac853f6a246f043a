//! The Green function of `m² + A^α`: its radial series, the two-sided bound
//! `−K1 ||x||^{-n} ≤ G ≤ K2 ||x||^{-n}`, and the weak identity `⟨G, (m² + A^α)φ⟩ = φ(0)`.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic_core::{scaled_pow, FiniteGrid, NormExponent, PadicVector, SeriesValue, WORKING_WINDOW};
use crate::radial_transform::{
    apply_operator, apply_operator_bounded, ball_sum, radial_fourier, ConstantProfile, GreenProfile, ProfileValue,
    RadialProfile, TestFunction,
};
use crate::symbol_algebra::{BesselSymbol, LogMagnitude};

#[derive(Debug, Clone)]
pub struct GreenParams {
    symbol: BesselSymbol,
    m: f64,
}

impl GreenParams {
    pub fn new(symbol: BesselSymbol, m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidArgument(format!("m must be positive, got {m}")));
        }
        Ok(Self { symbol, m })
    }

    pub fn symbol(&self) -> &BesselSymbol {
        &self.symbol
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `K1 = 1 / (m²(m² + 1))`.
    pub fn k1(&self) -> f64 {
        let m2 = self.m * self.m;
        1.0 / (m2 * (m2 + 1.0))
    }

    /// `K2 = 1 / m²`.
    pub fn k2(&self) -> f64 {
        1.0 / (self.m * self.m)
    }

    fn profile(&self) -> GreenProfile {
        GreenProfile { symbol: self.symbol.clone(), m: self.m }
    }
}

/// `G(x)` for `||x|| = p^γ`.
pub fn green_g(params: &GreenParams, gamma_x: NormExponent, tol: f64) -> Result<SeriesValue> {
    match gamma_x {
        NormExponent::Zero => Err(Error::OriginNotDefined),
        NormExponent::Finite(g) => radial_fourier(&params.profile(), g, params.symbol.dims(), tol),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenBoundRow {
    pub gamma: i32,
    pub value: SeriesValue,
    /// `G · ||x||^n`, to be compared with `[−K1, K2]`.
    pub normalized: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenBoundsReport {
    pub k1: f64,
    pub k2: f64,
    pub rows: Vec<GreenBoundRow>,
    pub min_margin: f64,
    pub passed: bool,
}

/// Checks `max(|ψ1|, |ψ2|) ≥ 1` on the working window and at the origin, then
/// the sandwich bound at every `γ` of the range.
pub fn green_bounds_certify(params: &GreenParams, gamma_range: RangeInclusive<i32>) -> Result<GreenBoundsReport> {
    let symbol = &params.symbol;
    let scan = std::iter::once(NormExponent::Zero).chain((-WORKING_WINDOW..=WORKING_WINDOW).map(NormExponent::Finite));
    for at in scan {
        let l = symbol.log_max(at)?;
        if l.partial_cmp(&LogMagnitude::Finite(0.0)) == Some(std::cmp::Ordering::Less) {
            return Err(Error::PreconditionFailed { reason: format!("max(|psi1|, |psi2|) < 1 at norm exponent {at}") });
        }
    }
    let dims = symbol.dims();
    let (k1, k2) = (params.k1(), params.k2());
    let rows = gamma_range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|g| -> Result<GreenBoundRow> {
            let value = green_g(params, NormExponent::Finite(g), crate::radial_transform::DEFAULT_TOL)?;
            let unscale = scaled_pow(dims.p(), dims.n() as i64 * g as i64, 1.0)?.to_f64();
            let normalized = value.value * unscale;
            let slack = value.tail_bound * unscale + 1e-14;
            let lower_margin = normalized + k1;
            let upper_margin = k2 - normalized;
            Ok(GreenBoundRow {
                gamma: g,
                value,
                normalized,
                lower_margin,
                upper_margin,
                pass: lower_margin >= -slack && upper_margin >= -slack,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_margin = rows.iter().map(|r| r.lower_margin.min(r.upper_margin)).fold(f64::INFINITY, f64::min);
    Ok(GreenBoundsReport { k1, k2, passed: rows.iter().all(|r| r.pass), rows, min_margin })
}

/// `m² + S(ξ)`, the multiplier of `m² + A^α`.
struct ResolventProfile<'a>(&'a GreenParams);

impl RadialProfile for ResolventProfile<'_> {
    fn eval(&self, at: NormExponent) -> Result<ProfileValue> {
        let s = self.0.symbol.value(at)?;
        Ok(ProfileValue { value: self.0.m * self.0.m + s.value, underflow: s.underflow })
    }

    fn describe(&self) -> String {
        format!("{}^2 + {}", self.0.m, self.0.symbol)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenDeltaReport {
    pub phi_at_origin: Complex64,
    /// `∫ φ̂`, computed ball by ball.
    pub fourier_side: Complex64,
    /// `Σ_x G(x) · ((m² + A^α)φ)(x) · w` over the grid.
    pub grid_pairing: Complex64,
    /// Accumulated series tail bounds entering the grid pairing.
    pub pairing_bound: f64,
    /// `|grid_pairing − φ(0)|`.
    pub residual: f64,
}

/// `⟨G, (m² + A^α)φ⟩` on the grid against `φ(0)`. The origin cell uses the
/// exact cell mass `∫_{||x|| ≤ p^{-N}} G`.
pub fn green_delta_residual(
    params: &GreenParams,
    phi: &TestFunction,
    grid: &FiniteGrid,
    tol: f64,
) -> Result<GreenDeltaReport> {
    let dims = params.symbol.dims();
    if phi.dims() != dims || grid.dims() != dims {
        return Err(Error::InvalidArgument("test function, grid and symbol disagree on Q_p^n".into()));
    }
    grid.ensure_enumerable()?;
    let origin = PadicVector::zero(dims);
    let phi0 = phi.eval(&origin);
    let fourier_side = apply_operator(&ConstantProfile(1.0), phi, &origin, tol)?;

    let w = grid.weight();
    let cell = ball_sum(&params.profile(), dims, grid.resolution() as i32, tol)?;
    let mut g_cache: HashMap<i32, SeriesValue> = HashMap::new();
    for g in -(grid.resolution() as i32) + 1..=grid.outer() as i32 {
        g_cache.insert(g, green_g(params, NormExponent::Finite(g), tol)?);
    }
    let resolvent = ResolventProfile(params);
    let (pairing, bound) = grid
        .points()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|x| -> Result<(Complex64, f64)> {
            let xv = grid.to_vector(&x);
            let (a_phi, a_bound) = apply_operator_bounded(&resolvent, phi, &xv, tol)?;
            let (mass, mass_bound) = match grid.norm_exponent(&x) {
                NormExponent::Zero => (cell.value, cell.tail_bound),
                NormExponent::Finite(g) => {
                    let v = g_cache[&g];
                    (v.value * w, v.tail_bound * w)
                }
            };
            Ok((a_phi * mass, mass_bound * a_phi.norm() + a_bound * mass.abs()))
        })
        .try_reduce(|| (Complex64::new(0.0, 0.0), 0.0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(GreenDeltaReport {
        phi_at_origin: phi0,
        fourier_side,
        grid_pairing: pairing,
        pairing_bound: bound,
        residual: (pairing - phi0).norm(),
    })
}

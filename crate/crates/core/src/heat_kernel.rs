//! The heat kernel `Z_t = F^{-1}[e^{-tS}]`, its sign, and the Cauchy problem
//! `∂_t u + A^α u = 0` with ball-indicator initial data.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic_core::{scaled_pow, FiniteGrid, NormExponent, PadicVector, SeriesValue, WORKING_WINDOW};
use crate::radial_transform::{apply_operator_bounded, radial_fourier, HeatProfile, TestFunction, DEFAULT_TOL};
use crate::symbol_algebra::{eval_abs_psi, BesselSymbol, RadialSpec};

#[derive(Debug, Clone)]
pub struct HeatQuery {
    symbol: BesselSymbol,
    t: f64,
}

impl HeatQuery {
    pub fn new(symbol: BesselSymbol, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("t must be finite and >= 0, got {t}")));
        }
        Ok(Self { symbol, t })
    }

    pub fn symbol(&self) -> &BesselSymbol {
        &self.symbol
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// `Z_t(x)` for `||x|| = p^γ`, `t > 0`.
pub fn heat_z(query: &HeatQuery, gamma_x: NormExponent, tol: f64) -> Result<SeriesValue> {
    if query.t == 0.0 {
        return Err(Error::TZeroIsDelta);
    }
    match gamma_x {
        NormExponent::Zero => Err(Error::OriginNotDefined),
        NormExponent::Finite(g) => {
            let profile = HeatProfile { symbol: query.symbol.clone(), t: query.t };
            radial_fourier(&profile, g, query.symbol.dims(), tol)
        }
    }
}

/// Fails unless `|ψ1|` and `|ψ2|` are non-decreasing in the norm (strictly
/// increasing with `strict`) on the working window, starting from the origin.
pub fn check_monotone(symbol: &BesselSymbol, strict: bool) -> Result<()> {
    let dims = symbol.dims();
    for (name, spec) in [("psi1", symbol.psi1()), ("psi2", symbol.psi2())] {
        let mut prev = eval_abs_psi(spec, dims, NormExponent::Zero)?;
        for g in -WORKING_WINDOW..=WORKING_WINDOW {
            let cur = eval_abs_psi(spec, dims, NormExponent::Finite(g))?;
            let ok = match prev.partial_cmp(&cur) {
                Some(std::cmp::Ordering::Less) => true,
                Some(std::cmp::Ordering::Equal) => !strict,
                _ => false,
            };
            if !ok {
                return Err(Error::PreconditionFailed {
                    reason: format!(
                        "|{name}| is not {} at norm exponent {g}",
                        if strict { "strictly increasing" } else { "non-decreasing" }
                    ),
                });
            }
            prev = cur;
        }
    }
    Ok(())
}

/// Where `||x||` sits relative to the ball `||ξ|| ≤ p^r` seen from the dual side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ProofCase {
    /// `||x|| > p^{-r}`.
    Outside,
    /// `||x|| = p^{-r}`.
    Boundary,
    /// `||x|| < p^{-r}`.
    Inside,
}

impl ProofCase {
    pub fn of(gamma: i32, r: i32) -> Self {
        match gamma.cmp(&-r) {
            std::cmp::Ordering::Greater => ProofCase::Outside,
            std::cmp::Ordering::Equal => ProofCase::Boundary,
            std::cmp::Ordering::Less => ProofCase::Inside,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HeatRow {
    pub gamma: i32,
    pub t: f64,
    pub case: ProofCase,
    pub value: SeriesValue,
    /// `p^{-nγ} (e^{-tS(p^{-γ})} − e^{-tS(p^{-γ+1})})`, itself `≤ 0`.
    pub comparison: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NonPositivityReport {
    pub crossing_radius: i32,
    pub rows: Vec<HeatRow>,
    pub outside: usize,
    pub inside: usize,
    pub boundary: usize,
    pub max_value: f64,
    pub passed: bool,
}

/// Threshold for `Z ≤ 0`.
pub const NONPOSITIVE_TOL: f64 = 1e-12;

/// `Z_t(x) ≤ 0` on the product of `gamma_range` and `ts`, grouped by proof case.
pub fn nonpositivity_certify(
    symbol: &BesselSymbol,
    gamma_range: RangeInclusive<i32>,
    ts: &[f64],
    strict: bool,
) -> Result<NonPositivityReport> {
    check_monotone(symbol, strict)?;
    if ts.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
        return Err(Error::InvalidArgument("every t must be positive".into()));
    }
    let dims = symbol.dims();
    let r = symbol.crossing_radius();
    let jobs: Vec<(i32, f64)> = gamma_range.flat_map(|g| ts.iter().map(move |&t| (g, t))).collect();
    let rows = jobs
        .into_par_iter()
        .map(|(g, t)| -> Result<HeatRow> {
            let q = HeatQuery::new(symbol.clone(), t)?;
            let value = heat_z(&q, NormExponent::Finite(g), DEFAULT_TOL)?;
            let s_in = symbol.value(NormExponent::Finite(-g))?.value;
            let s_edge = symbol.value(NormExponent::Finite(-g + 1))?.value;
            let comparison =
                scaled_pow(dims.p(), -(dims.n() as i64) * g as i64, (-t * s_in).exp() - (-t * s_edge).exp())?.to_f64();
            let pass = value.value <= NONPOSITIVE_TOL && value.value <= comparison + value.tail_bound + NONPOSITIVE_TOL;
            Ok(HeatRow { gamma: g, t, case: ProofCase::of(g, r), value, comparison, pass })
        })
        .collect::<Result<Vec<_>>>()?;
    let count = |c| rows.iter().filter(|row| row.case == c).count();
    let (outside, boundary, inside) = (count(ProofCase::Outside), count(ProofCase::Boundary), count(ProofCase::Inside));
    let max_value = rows.iter().map(|row| row.value.value).fold(f64::NEG_INFINITY, f64::max);
    Ok(NonPositivityReport {
        crossing_radius: r,
        passed: rows.iter().all(|row| row.pass),
        rows,
        outside,
        inside,
        boundary,
        max_value,
    })
}

/// `u(x, t) = ∫ χ_p(−x·ξ) e^{-tS(ξ)} û₀(ξ) dξ`; `u₀(x)` at `t = 0`.
pub fn cauchy_solve(symbol: &BesselSymbol, u0: &TestFunction, x: &PadicVector, t: f64) -> Result<Complex64> {
    cauchy_solve_bounded(symbol, u0, x, t).map(|(v, _)| v)
}

/// [`cauchy_solve`] with the accumulated tail bound.
pub fn cauchy_solve_bounded(
    symbol: &BesselSymbol,
    u0: &TestFunction,
    x: &PadicVector,
    t: f64,
) -> Result<(Complex64, f64)> {
    HeatQuery::new(symbol.clone(), t)?;
    if t == 0.0 {
        return Ok((u0.eval(x), 0.0));
    }
    apply_operator_bounded(&HeatProfile { symbol: symbol.clone(), t }, u0, x, DEFAULT_TOL)
}

/// `∫ u(·, t) = e^{-tS(0)} ∫ u₀`.
pub fn mass_evolution(symbol: &BesselSymbol, u0: &TestFunction, t: f64) -> Result<f64> {
    if u0.terms().iter().any(|term| term.coeff.im != 0.0) {
        return Err(Error::InvalidArgument("initial data must be real".into()));
    }
    HeatQuery::new(symbol.clone(), t)?;
    let s0 = symbol.at_origin()?;
    Ok((-t * s0).exp() * u0.integral().re)
}

/// `Σ_x u(x, t) w` over a grid, for comparison with [`mass_evolution`].
pub fn grid_mass(symbol: &BesselSymbol, u0: &TestFunction, t: f64, grid: &FiniteGrid) -> Result<f64> {
    grid.ensure_enumerable()?;
    let w = grid.weight();
    let sum = grid
        .points()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|x| cauchy_solve(symbol, u0, &grid.to_vector(&x), t).map(|u| u.re * w))
        .try_reduce(|| 0.0, |a, b| Ok(a + b))?;
    Ok(sum)
}

/// `true` when both specs are of a family that is monotone by construction.
pub fn monotone_by_family(symbol: &BesselSymbol) -> bool {
    [symbol.psi1(), symbol.psi2()].iter().all(|s| RadialSpec::is_monotone_family(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic_core::{PadicRational, PrimeDim};

    fn d(p: u32, n: u32) -> PrimeDim {
        PrimeDim::new(p, n).unwrap()
    }

    fn worked() -> BesselSymbol {
        BesselSymbol::parse("const:1", "power:a=1,b=2", 1.0, d(2, 1)).unwrap()
    }

    fn z(t: f64, g: i32) -> f64 {
        heat_z(&HeatQuery::new(worked(), t).unwrap(), NormExponent::Finite(g), 1e-12).unwrap().value
    }

    #[test]
    fn hand_values() {
        let expect = (-1f64).exp() - (-0.25f64).exp();
        assert!((z(1.0, 0) - expect).abs() < 1e-12);
        assert!(z(1.0, 1).abs() < 1e-12);
    }

    #[test]
    fn refuses_delta_and_origin() {
        let q = HeatQuery::new(worked(), 0.0).unwrap();
        assert_eq!(heat_z(&q, NormExponent::Finite(0), 1e-12), Err(Error::TZeroIsDelta));
        let q = HeatQuery::new(worked(), 1.0).unwrap();
        assert_eq!(heat_z(&q, NormExponent::Zero, 1e-12), Err(Error::OriginNotDefined));
        assert!(HeatQuery::new(worked(), -1.0).is_err());
    }

    #[test]
    fn small_t_goes_to_zero() {
        for g in -3..=3 {
            assert!(z(1e-9, g).abs() < 1e-8);
        }
    }

    #[test]
    fn worked_family_is_nonpositive_in_all_cases() {
        let r = nonpositivity_certify(&worked(), -10..=10, &[0.1, 1.0, 10.0], false).unwrap();
        assert!(r.passed, "{:?}", r.rows.iter().find(|row| !row.pass));
        assert!(r.outside > 0 && r.boundary > 0 && r.inside > 0);
    }

    #[test]
    fn equal_constants_give_zero() {
        let s = BesselSymbol::with_window(
            "const:1".parse().unwrap(),
            "power:a=1,b=2".parse().unwrap(),
            1.0,
            d(3, 1),
            -5..=5,
        )
        .unwrap();
        // with ψ1 = 1 the kernel vanishes for ||x|| ≥ p
        let q = HeatQuery::new(s, 2.0).unwrap();
        for g in 1..6 {
            assert_eq!(heat_z(&q, NormExponent::Finite(g), 1e-12).unwrap().value, 0.0);
        }
    }

    #[test]
    fn strict_flag_rejects_constant_psi1() {
        assert!(check_monotone(&worked(), false).is_ok());
        assert!(matches!(check_monotone(&worked(), true), Err(Error::PreconditionFailed { .. })));
    }

    #[test]
    fn decreasing_table_fails_monotonicity() {
        let s = BesselSymbol::parse("const:4", "table:-1:1,0:2,1:8,2:5,3:16;default=hold", 1.0, d(2, 1)).unwrap();
        assert!(matches!(nonpositivity_certify(&s, -2..=2, &[1.0], false), Err(Error::PreconditionFailed { .. })));
    }

    #[test]
    fn cauchy_on_unit_ball() {
        let dims = d(2, 1);
        let u0 = TestFunction::unit_ball(dims);
        for t in [0.0, 0.5, 1.0, 3.0] {
            for g in -3..=3 {
                let x = PadicVector::with_norm(dims, g);
                let u = cauchy_solve(&worked(), &u0, &x, t).unwrap();
                let expect = if g <= 0 { (-t).exp() } else { 0.0 };
                assert!((u - Complex64::new(expect, 0.0)).norm() < 1e-12, "{t} {g}: {u}");
            }
        }
    }

    #[test]
    fn translation_covariance() {
        let dims = d(3, 1);
        let s = BesselSymbol::parse("const:1", "power:a=1,b=2", 0.8, dims).unwrap();
        let u0 = TestFunction::ball(dims, PadicVector::zero(dims), -1, Complex64::new(1.0, 0.0)).unwrap();
        let a = PadicVector(vec![PadicRational::new(3, 5, 1)]);
        let shifted = u0.translate(&a);
        for g in -2..=2 {
            let x = PadicVector::with_norm(dims, g);
            let lhs = cauchy_solve(&s, &shifted, &x.add(&a), 0.7).unwrap();
            let rhs = cauchy_solve(&s, &u0, &x, 0.7).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn semigroup_in_t() {
        // u(t1) = e^{-t1} 1_{Z_2}, so evolving it again for t2 matches u(t1 + t2)
        let dims = d(2, 1);
        let u0 = TestFunction::unit_ball(dims);
        let (t1, t2) = (0.4f64, 1.3);
        let mid = TestFunction::ball(dims, PadicVector::zero(dims), 0, Complex64::new((-t1).exp(), 0.0)).unwrap();
        for g in -2..=2 {
            let x = PadicVector::with_norm(dims, g);
            let direct = cauchy_solve(&worked(), &u0, &x, t1 + t2).unwrap();
            let staged = cauchy_solve(&worked(), &mid, &x, t2).unwrap();
            assert!((direct - staged).norm() < 1e-12);
        }
    }

    #[test]
    fn mass_decays() {
        let dims = d(2, 1);
        let u0 = TestFunction::unit_ball(dims);
        let grid = FiniteGrid::new(dims, 3, 3).unwrap();
        for t in [0.0, 0.5, 2.0] {
            let exact = mass_evolution(&worked(), &u0, t).unwrap();
            assert!((exact - (-t).exp()).abs() < 1e-15);
            assert!((grid_mass(&worked(), &u0, t, &grid).unwrap() - exact).abs() < 1e-8);
        }
        let balanced = u0.clone().with_ball(PadicVector::with_norm(dims, 3), 0, Complex64::new(-1.0, 0.0)).unwrap();
        assert_eq!(mass_evolution(&worked(), &balanced, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn sup_is_non_increasing() {
        let dims = d(2, 1);
        let u0 = TestFunction::unit_ball(dims);
        let sup = |t| {
            (-3..=3)
                .map(|g| cauchy_solve(&worked(), &u0, &PadicVector::with_norm(dims, g), t).unwrap().norm())
                .fold(0.0, f64::max)
        };
        let mut prev = f64::INFINITY;
        for t in [0.0, 0.1, 0.5, 1.0, 4.0] {
            let s = sup(t);
            assert!(s <= prev);
            prev = s;
        }
    }
}

//! Exact p-adic primitives: norms, fractional parts, the additive character,
//! the unit-sphere character integral and finite quotient grids.
//!
//! Everything here is exact where it can be. Coordinates are rationals whose
//! denominators are powers of `p`, fractional parts are exact rationals, and
//! `exp(2πi q)` is only evaluated after `q` has been reduced modulo 1 in
//! integer arithmetic.

mod grid;
mod scaled;

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::{enumerate_grid, FiniteGrid, GridPoint, DEFAULT_POINT_BUDGET};
pub use scaled::{scaled_pow, ScaledReal, SCALED_POW_LIMIT};

/// Norm exponents handled by the series engine satisfy `|γ| <= WORKING_WINDOW`.
pub const WORKING_WINDOW: i32 = 200;

/// The prime `p` and the dimension `n` of `Q_p^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeDim {
    p: u32,
    n: u32,
}

impl PrimeDim {
    pub fn new(p: u32, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { p, n })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `1 - p^{-n}`, the Haar measure of the unit sphere of `Q_p^n`.
    pub fn sphere_measure(&self) -> f64 {
        1.0 - self.p_pow_n(-1)
    }

    /// `p^{n e}` as a plain float. Only for exponents well inside binary64
    /// range; use [`scaled_pow`] otherwise.
    pub fn p_pow_n(&self, e: i64) -> f64 {
        (self.p as f64).powi((self.n as i64 * e) as i32)
    }

    /// `p^{γ}`, the norm coded by a finite exponent.
    pub fn norm_value(&self, at: NormExponent) -> f64 {
        match at {
            NormExponent::Zero => 0.0,
            NormExponent::Finite(g) => (self.p as f64).powi(g),
        }
    }
}

impl fmt::Display for PrimeDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q_{}^{}", self.p, self.n)
    }
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A p-adic norm value: `Finite(γ)` is the norm `p^γ`, `Zero` is the norm of
/// the origin. `Zero` sorts below every finite exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NormExponent {
    Zero,
    Finite(i32),
}

impl NormExponent {
    pub fn finite(self) -> Option<i32> {
        match self {
            NormExponent::Zero => None,
            NormExponent::Finite(g) => Some(g),
        }
    }

    /// Fails with `WindowExceeded` if a finite exponent leaves `±WORKING_WINDOW`.
    pub fn check_window(self) -> Result<Self> {
        match self {
            NormExponent::Finite(g) if g.abs() > WORKING_WINDOW => {
                Err(Error::WindowExceeded { exponent: g as i64, limit: WORKING_WINDOW as i64 })
            }
            _ => Ok(self),
        }
    }
}

impl fmt::Display for NormExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormExponent::Zero => f.write_str("zero"),
            NormExponent::Finite(g) => write!(f, "{g}"),
        }
    }
}

/// An element of `Z[1/p] ⊂ Q_p`, stored as `num · p^{-scale}` with the
/// fraction reduced (`p ∤ num` whenever `scale > 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicRational {
    p: u32,
    num: i128,
    scale: u32,
}

impl PadicRational {
    pub fn new(p: u32, num: i128, scale: u32) -> Self {
        let mut x = Self { p, num, scale };
        x.reduce();
        x
    }

    pub fn zero(p: u32) -> Self {
        Self { p, num: 0, scale: 0 }
    }

    pub fn from_integer(p: u32, value: i128) -> Self {
        Self { p, num: value, scale: 0 }
    }

    /// `p^k` for any integer `k`.
    pub fn prime_power(p: u32, k: i32) -> Self {
        if k >= 0 {
            Self::from_integer(p, (p as i128).pow(k as u32))
        } else {
            Self::new(p, 1, k.unsigned_abs())
        }
    }

    /// `Σ_k digits[k] · p^{lowest + k}`, i.e. a digit vector `(a_lowest, …)`.
    pub fn from_digits(p: u32, lowest: i32, digits: &[u32]) -> Self {
        let mut acc: i128 = 0;
        for &d in digits.iter().rev() {
            debug_assert!(d < p, "digit {d} out of range for p = {p}");
            acc = acc * p as i128 + d as i128;
        }
        if lowest >= 0 {
            Self::from_integer(p, acc * (p as i128).pow(lowest as u32))
        } else {
            Self::new(p, acc, lowest.unsigned_abs())
        }
    }

    fn reduce(&mut self) {
        if self.num == 0 {
            self.scale = 0;
            return;
        }
        let p = self.p as i128;
        while self.scale > 0 && self.num % p == 0 {
            self.num /= p;
            self.scale -= 1;
        }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// `ord_p(x)`, `None` for zero.
    pub fn ord(&self) -> Option<i32> {
        if self.num == 0 {
            return None;
        }
        let p = self.p as i128;
        let mut v = 0i32;
        let mut m = self.num;
        while m % p == 0 {
            m /= p;
            v += 1;
        }
        Some(v - self.scale as i32)
    }

    pub fn norm_exponent(&self) -> NormExponent {
        match self.ord() {
            None => NormExponent::Zero,
            Some(o) => NormExponent::Finite(-o),
        }
    }

    /// Digits `(a_lowest, …, a_{lowest+count-1})` of the representative of
    /// `x mod p^{lowest+count}` in `[0, p^{lowest+count})`.
    pub fn digits(&self, lowest: i32, count: usize) -> Vec<u32> {
        let p = self.p as i128;
        // shift so that the lowest requested digit sits at p^0
        let shifted = self.mul(&Self::prime_power(self.p, -lowest));
        assert!(shifted.scale == 0, "value has digits below p^{lowest}");
        let modulus = p.pow(count as u32);
        let mut m = shifted.num.rem_euclid(modulus);
        (0..count)
            .map(|_| {
                let d = (m % p) as u32;
                m /= p;
                d
            })
            .collect()
    }

    fn align(&self, other: &Self) -> (i128, i128, u32) {
        assert_eq!(self.p, other.p, "mixing primes");
        let s = self.scale.max(other.scale);
        let p = self.p as i128;
        let a = self.num.checked_mul(p.pow(s - self.scale)).expect("p-adic rational overflow");
        let b = other.num.checked_mul(p.pow(s - other.scale)).expect("p-adic rational overflow");
        (a, b, s)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b, s) = self.align(other);
        Self::new(self.p, a.checked_add(b).expect("p-adic rational overflow"), s)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self { p: self.p, num: -self.num, scale: self.scale }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "mixing primes");
        Self::new(self.p, self.num.checked_mul(other.num).expect("p-adic rational overflow"), self.scale + other.scale)
    }
}

impl fmt::Display for PadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}^{}", self.num, self.p, self.scale)
        }
    }
}

/// The fractional part `{x}_p ∈ [0, 1)`, exact. Zero when `ord(x) >= 0`,
/// otherwise the sum of the negative-index digits of `x`.
pub fn frac_part(x: &PadicRational) -> Ratio<i128> {
    if x.scale == 0 {
        return Ratio::from_integer(0);
    }
    let den = (x.p as i128).pow(x.scale);
    Ratio::new(x.num.rem_euclid(den), den)
}

/// `exp(2πi · a/b)` with `a` reduced modulo `b` exactly before any floating
/// point work.
pub fn root_of_unity(a: i128, b: i128) -> Complex64 {
    assert!(b > 0);
    let mut r = a.rem_euclid(b);
    if 2 * r > b {
        r -= b;
    }
    let (s, c) = (TAU * (r as f64 / b as f64)).sin_cos();
    Complex64::new(c, s)
}

/// The additive character `χ_p(x) = exp(2πi {x}_p)`.
pub fn character(x: &PadicRational) -> Complex64 {
    let q = frac_part(x);
    root_of_unity(*q.numer(), *q.denom())
}

/// `∫_{||z||_p = 1} χ_p(-p^{-j} x₀·z) d^n z` for any `x₀` of norm one.
pub fn unit_sphere_char_integral(j: i32, dims: PrimeDim) -> f64 {
    match j.cmp(&1) {
        Ordering::Less => dims.sphere_measure(),
        Ordering::Equal => -dims.p_pow_n(-1),
        Ordering::Greater => 0.0,
    }
}

/// A point of `Q_p^n` with coordinates in `Z[1/p]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicVector(pub Vec<PadicRational>);

impl PadicVector {
    pub fn zero(dims: PrimeDim) -> Self {
        Self(vec![PadicRational::zero(dims.p()); dims.n() as usize])
    }

    /// The point `(p^k, 0, …, 0)`, of norm `p^{-k}`.
    pub fn axis_power(dims: PrimeDim, k: i32) -> Self {
        let mut v = Self::zero(dims);
        v.0[0] = PadicRational::prime_power(dims.p(), k);
        v
    }

    /// A point of norm exactly `p^γ` (first coordinate `p^{-γ}`).
    pub fn with_norm(dims: PrimeDim, gamma: i32) -> Self {
        Self::axis_power(dims, -gamma)
    }

    pub fn from_integers(p: u32, values: &[i128]) -> Self {
        Self(values.iter().map(|&v| PadicRational::from_integer(p, v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm_exponent(&self) -> NormExponent {
        self.0.iter().map(PadicRational::norm_exponent).max().unwrap_or(NormExponent::Zero)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.add(b)).collect())
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(PadicRational::neg).collect())
    }

    pub fn scale_by(&self, c: &PadicRational) -> Self {
        Self(self.0.iter().map(|a| a.mul(c)).collect())
    }

    pub fn dot(&self, other: &Self) -> PadicRational {
        assert_eq!(self.dim(), other.dim());
        let p = self.0.first().map(|c| c.prime()).unwrap_or(2);
        self.0.iter().zip(&other.0).fold(PadicRational::zero(p), |acc, (a, b)| acc.add(&a.mul(b)))
    }
}

/// Absolute truncation error is at most `tail_bound` under the series' tail
/// model; `underflow` marks a value in which some term was flushed to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
    pub underflow: bool,
}

/// Neumaier's compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

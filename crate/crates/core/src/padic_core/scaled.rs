use std::fmt;

use crate::error::{Error, Result};

/// Largest `|exponent|` accepted by [`scaled_pow`].
pub const SCALED_POW_LIMIT: i64 = 2000;

/// A real number `mantissa · 2^exp2` with `mantissa ∈ [0.5, 1)` (or zero),
/// so that powers like `p^{nγ}` survive far outside binary64 range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledReal {
    mantissa: f64,
    exp2: i64,
}

fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    if biased == 0 {
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, biased - 1022)
}

fn ldexp(m: f64, e: i64) -> f64 {
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    if e > 1100 {
        return m.signum() * f64::INFINITY;
    }
    if e < -1200 {
        return m.signum() * 0.0;
    }
    let half = e / 2;
    m * 2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
}

impl ScaledReal {
    pub const ZERO: ScaledReal = ScaledReal { mantissa: 0.0, exp2: 0 };

    pub fn from_f64(x: f64) -> Self {
        let (mantissa, exp2) = frexp(x);
        Self { mantissa, exp2 }
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn mul(self, other: Self) -> Self {
        let (m, e) = frexp(self.mantissa * other.mantissa);
        Self { mantissa: m, exp2: e + self.exp2 + other.exp2 }
    }

    pub fn mul_f64(self, x: f64) -> Self {
        self.mul(Self::from_f64(x))
    }

    pub fn recip(self) -> Self {
        let (m, e) = frexp(1.0 / self.mantissa);
        Self { mantissa: m, exp2: e - self.exp2 }
    }

    /// Natural logarithm of `|x|`.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }

    /// Nearest binary64 value; saturates to `±inf` or flushes to zero.
    pub fn to_f64(self) -> f64 {
        ldexp(self.mantissa, self.exp2)
    }

    /// Like [`ScaledReal::to_f64`] but refuses to overflow.
    pub fn to_f64_checked(self) -> Result<f64> {
        let v = self.to_f64();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::WindowExceeded { exponent: self.exp2, limit: 1023 })
        }
    }
}

impl fmt::Display for ScaledReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·2^{}", self.mantissa, self.exp2)
    }
}

/// `scale · p^{exponent}` without intermediate overflow or underflow.
pub fn scaled_pow(p: u32, exponent: i64, scale: f64) -> Result<ScaledReal> {
    if exponent.abs() > SCALED_POW_LIMIT {
        return Err(Error::WindowExceeded { exponent, limit: SCALED_POW_LIMIT });
    }
    let mut base = ScaledReal::from_f64(p as f64);
    let mut acc = ScaledReal::from_f64(1.0);
    let mut e = exponent.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(base);
        }
        base = base.mul(base);
        e >>= 1;
    }
    if exponent < 0 {
        acc = acc.recip();
    }
    Ok(acc.mul_f64(scale))
}

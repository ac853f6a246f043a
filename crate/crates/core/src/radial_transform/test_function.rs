use num_complex::Complex64;

use super::{ball_sum, RadialProfile};
use crate::error::{Error, Result};
use crate::padic_core::{character, scaled_pow, NormExponent, PadicVector, PrimeDim};

/// `coeff · 1{||x − center|| ≤ p^{radius_exp}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallTerm {
    pub center: PadicVector,
    pub radius_exp: i32,
    pub coeff: Complex64,
}

impl BallTerm {
    fn contains(&self, x: &PadicVector) -> bool {
        match x.sub(&self.center).norm_exponent() {
            NormExponent::Zero => true,
            NormExponent::Finite(g) => g <= self.radius_exp,
        }
    }
}

/// A finite linear combination of ball indicators. The empty sum is the zero
/// function.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    dims: PrimeDim,
    terms: Vec<BallTerm>,
}

impl TestFunction {
    pub fn zero(dims: PrimeDim) -> Self {
        Self { dims, terms: Vec::new() }
    }

    /// `coeff · 1_{B_r(center)}`.
    pub fn ball(dims: PrimeDim, center: PadicVector, radius_exp: i32, coeff: Complex64) -> Result<Self> {
        Self::zero(dims).with_ball(center, radius_exp, coeff)
    }

    /// `1_{Z_p^n}`.
    pub fn unit_ball(dims: PrimeDim) -> Self {
        Self::ball(dims, PadicVector::zero(dims), 0, Complex64::new(1.0, 0.0)).expect("origin has the right dimension")
    }

    pub fn with_ball(mut self, center: PadicVector, radius_exp: i32, coeff: Complex64) -> Result<Self> {
        if center.dim() != self.dims.n() as usize {
            return Err(Error::InvalidArgument(format!(
                "center has {} coordinates, expected {}",
                center.dim(),
                self.dims.n()
            )));
        }
        if center.0.iter().any(|c| c.prime() != self.dims.p()) {
            return Err(Error::InvalidArgument("center uses a different prime".into()));
        }
        self.terms.push(BallTerm { center, radius_exp, coeff });
        Ok(self)
    }

    pub fn dims(&self) -> PrimeDim {
        self.dims
    }

    pub fn terms(&self) -> &[BallTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &PadicVector) -> Complex64 {
        self.terms.iter().filter(|t| t.contains(x)).map(|t| t.coeff).sum()
    }

    /// `φ̂(ξ) = Σ coeff · χ(a·ξ) · p^{n r} · 1{||ξ|| ≤ p^{-r}}`.
    pub fn fourier(&self, xi: &PadicVector) -> Complex64 {
        let n = self.dims.n() as i64;
        self.terms
            .iter()
            .filter(|t| match xi.norm_exponent() {
                NormExponent::Zero => true,
                NormExponent::Finite(g) => g <= -t.radius_exp,
            })
            .map(|t| {
                let vol = scaled_pow(self.dims.p(), n * t.radius_exp as i64, 1.0)
                    .map(|v| v.to_f64())
                    .unwrap_or(f64::INFINITY);
                t.coeff * character(&t.center.dot(xi)) * vol
            })
            .sum()
    }

    /// `∫ φ = Σ coeff · p^{n r}`.
    pub fn integral(&self) -> Complex64 {
        let n = self.dims.n() as i64;
        self.terms
            .iter()
            .map(|t| {
                let vol = scaled_pow(self.dims.p(), n * t.radius_exp as i64, 1.0)
                    .map(|v| v.to_f64())
                    .unwrap_or(f64::INFINITY);
                t.coeff * vol
            })
            .sum()
    }

    /// `x ↦ φ(x − a)`.
    pub fn translate(&self, a: &PadicVector) -> Self {
        Self {
            dims: self.dims,
            terms: self.terms.iter().map(|t| BallTerm { center: t.center.add(a), ..t.clone() }).collect(),
        }
    }
}

/// `F^{-1}[m · φ̂](x)` computed ball by ball on the Fourier side.
pub fn apply_operator(m: &dyn RadialProfile, phi: &TestFunction, x: &PadicVector, tol: f64) -> Result<Complex64> {
    apply_operator_bounded(m, phi, x, tol).map(|(v, _)| v)
}

/// Like [`apply_operator`], also returning the accumulated tail bound.
pub fn apply_operator_bounded(
    m: &dyn RadialProfile,
    phi: &TestFunction,
    x: &PadicVector,
    tol: f64,
) -> Result<(Complex64, f64)> {
    let dims = phi.dims;
    let p = dims.p();
    let n = dims.n() as i64;
    let mut total = Complex64::new(0.0, 0.0);
    let mut bound = 0.0;
    for t in &phi.terms {
        let r = t.radius_exp as i64;
        // ∫_{||ξ|| ≤ p^{-r}} χ(−z·ξ) m(||ξ||) dξ with z = x − a; shells above
        // p^{-γ_z + 1} cancel, the shell at p^{-γ_z + 1} integrates to −p^{-nγ_z}
        let (top, edge) = match x.sub(&t.center).norm_exponent() {
            NormExponent::Zero => (-r, None),
            NormExponent::Finite(gz) => {
                let gz = gz as i64;
                (-r.max(gz), (1 - gz <= -r).then_some(gz))
            }
        };
        let top = i32::try_from(top).map_err(|_| Error::WindowExceeded { exponent: top, limit: i32::MAX as i64 })?;
        let inner = ball_sum(m, dims, top, tol)?;
        let scale = scaled_pow(p, n * (r + top as i64), 1.0)?.to_f64();
        bound += inner.tail_bound * scale * t.coeff.norm();
        // with an edge shell top = −γ_z, so both parts share the scale p^{n(r − γ_z)}
        let value = match edge {
            None => inner.value * scale,
            Some(gz) => {
                let me = m.eval(NormExponent::Finite((1 - gz) as i32))?;
                ((inner.limit - me.value) + inner.deviation) * scale
            }
        };
        total += t.coeff * value;
    }
    Ok((total, bound))
}

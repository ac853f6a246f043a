use std::ops::Range;

use num_rational::Ratio;

use super::{NormExponent, PadicRational, PadicVector, PrimeDim};
use crate::error::{Error, Result};

/// Default cap on the number of points any enumerating routine may visit.
pub const DEFAULT_POINT_BUDGET: u128 = 10_000_000;

/// The finite group `p^{-M} Z_p^n / p^N Z_p^n`.
///
/// A coordinate is stored as an integer `X ∈ [0, p^{M+N})` standing for the
/// coset of `X · p^{-M}`; its base-`p` digits are `(a_{-M}, …, a_{N-1})`.
/// Each point carries Haar weight `p^{-nN}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGrid {
    dims: PrimeDim,
    outer: u32,
    resolution: u32,
    modulus: u64,
    budget: u128,
}

/// A coset representative in some [`FiniteGrid`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridPoint {
    coords: Vec<u64>,
}

impl GridPoint {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Digits `(a_{-M}, …, a_{N-1})` of coordinate `i`.
    pub fn digits(&self, grid: &FiniteGrid, i: usize) -> Vec<u32> {
        let p = grid.dims.p() as u64;
        let mut x = self.coords[i];
        (0..grid.levels())
            .map(|_| {
                let d = (x % p) as u32;
                x /= p;
                d
            })
            .collect()
    }
}

/// Build the grid and check that enumerating it stays within the default budget.
pub fn enumerate_grid(dims: PrimeDim, outer: u32, resolution: u32) -> Result<FiniteGrid> {
    let grid = FiniteGrid::new(dims, outer, resolution)?;
    grid.ensure_enumerable()?;
    Ok(grid)
}

impl FiniteGrid {
    pub fn new(dims: PrimeDim, outer: u32, resolution: u32) -> Result<Self> {
        let levels = outer + resolution;
        let modulus = (dims.p() as u64)
            .checked_pow(levels)
            .filter(|&q| q < (1 << 62))
            .ok_or(Error::WindowExceeded { exponent: levels as i64, limit: 62 })?;
        Ok(Self { dims, outer, resolution, modulus, budget: DEFAULT_POINT_BUDGET })
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn dims(&self) -> PrimeDim {
        self.dims
    }

    /// `M`: the grid covers the ball of radius `p^M`.
    pub fn outer(&self) -> u32 {
        self.outer
    }

    /// `N`: points are cosets of `p^N Z_p^n`.
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// `M + N`, the number of digits per coordinate.
    pub fn levels(&self) -> u32 {
        self.outer + self.resolution
    }

    /// `p^{M+N}`, the size of one coordinate axis.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn budget(&self) -> u128 {
        self.budget
    }

    /// `p^{n(M+N)}`.
    pub fn point_count(&self) -> u128 {
        (self.modulus as u128).checked_pow(self.dims.n()).unwrap_or(u128::MAX)
    }

    pub fn len(&self) -> usize {
        self.point_count() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ensure_enumerable(&self) -> Result<()> {
        let points = self.point_count();
        if points > self.budget {
            return Err(Error::BudgetExceeded { points, budget: self.budget });
        }
        Ok(())
    }

    /// Haar weight `p^{-nN}` of each point.
    pub fn weight(&self) -> f64 {
        self.dims.p_pow_n(-(self.resolution as i64))
    }

    pub fn weight_exact(&self) -> Ratio<i128> {
        Ratio::new(1, (self.dims.p() as i128).pow(self.dims.n() * self.resolution))
    }

    /// `Σ weights = p^{nM}`, in exact arithmetic.
    pub fn total_measure_exact(&self) -> Ratio<i128> {
        self.weight_exact() * Ratio::from_integer(self.point_count() as i128)
    }

    pub fn total_measure(&self) -> f64 {
        self.dims.p_pow_n(self.outer as i64)
    }

    /// The Pontryagin dual `p^{-N} Z_p^n / p^M Z_p^n`.
    pub fn dual(&self) -> FiniteGrid {
        Self {
            dims: self.dims,
            outer: self.resolution,
            resolution: self.outer,
            modulus: self.modulus,
            budget: self.budget,
        }
    }

    pub fn zero(&self) -> GridPoint {
        GridPoint { coords: vec![0; self.dims.n() as usize] }
    }

    pub fn point(&self, mut index: usize) -> GridPoint {
        let q = self.modulus as usize;
        let coords = (0..self.dims.n())
            .map(|_| {
                let c = (index % q) as u64;
                index /= q;
                c
            })
            .collect();
        GridPoint { coords }
    }

    pub fn index_of(&self, x: &GridPoint) -> usize {
        let q = self.modulus as usize;
        x.coords.iter().rev().fold(0usize, |acc, &c| acc * q + c as usize)
    }

    /// All points in index order. Call [`FiniteGrid::ensure_enumerable`] first
    /// when the grid size is not already known to be small.
    pub fn points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        self.points_in(0..self.len())
    }

    /// A contiguous slice of the enumeration, for splitting work.
    pub fn points_in(&self, range: Range<usize>) -> impl Iterator<Item = GridPoint> + '_ {
        range.map(move |i| self.point(i))
    }

    pub fn from_coords(&self, coords: Vec<u64>) -> GridPoint {
        assert_eq!(coords.len(), self.dims.n() as usize);
        assert!(coords.iter().all(|&c| c < self.modulus));
        GridPoint { coords }
    }

    pub fn add(&self, x: &GridPoint, y: &GridPoint) -> GridPoint {
        let q = self.modulus;
        GridPoint { coords: x.coords.iter().zip(&y.coords).map(|(&a, &b)| (a + b) % q).collect() }
    }

    pub fn neg(&self, x: &GridPoint) -> GridPoint {
        let q = self.modulus;
        GridPoint { coords: x.coords.iter().map(|&a| (q - a) % q).collect() }
    }

    pub fn sub(&self, x: &GridPoint, y: &GridPoint) -> GridPoint {
        self.add(x, &self.neg(y))
    }

    /// `p`-adic valuation of the integer coordinate, `None` for zero.
    fn coord_valuation(&self, c: u64) -> Option<u32> {
        if c == 0 {
            return None;
        }
        let p = self.dims.p() as u64;
        let mut v = 0;
        let mut m = c;
        while m.is_multiple_of(p) {
            m /= p;
            v += 1;
        }
        Some(v)
    }

    /// `γ = -min{k : some a_k ≠ 0}`; `Zero` when every digit vanishes.
    pub fn norm_exponent(&self, x: &GridPoint) -> NormExponent {
        x.coords
            .iter()
            .filter_map(|&c| self.coord_valuation(c))
            .min()
            .map(|v| NormExponent::Finite(self.outer as i32 - v as i32))
            .unwrap_or(NormExponent::Zero)
    }

    pub fn coordinate(&self, x: &GridPoint, i: usize) -> PadicRational {
        PadicRational::new(self.dims.p(), x.coords[i] as i128, self.outer)
    }

    pub fn to_vector(&self, x: &GridPoint) -> PadicVector {
        PadicVector((0..x.coords.len()).map(|i| self.coordinate(x, i)).collect())
    }

    /// The coset containing `v`, if `v ∈ p^{-M} Z_p^n`.
    pub fn from_vector(&self, v: &PadicVector) -> Option<GridPoint> {
        let mut coords = Vec::with_capacity(v.dim());
        for c in &v.0 {
            if c.scale() > self.outer {
                return None;
            }
            let digits = c.digits(-(self.outer as i32), self.levels() as usize);
            let p = self.dims.p() as u64;
            coords.push(digits.iter().rev().fold(0u64, |acc, &d| acc * p + d as u64));
        }
        Some(GridPoint { coords })
    }

    /// `Σ_i X_i Ξ_i mod p^{M+N}` for `ξ` on this grid and `x` on the dual, so
    /// that `χ_p(x·ξ) = exp(2πi · residue / p^{M+N})`.
    pub fn pairing_residue(&self, xi: &GridPoint, x_dual: &GridPoint) -> u64 {
        let q = self.modulus as u128;
        let s =
            xi.coords.iter().zip(&x_dual.coords).fold(0u128, |acc, (&a, &b)| (acc + (a as u128 * b as u128) % q) % q);
        s as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(p: u32, n: u32, m: u32, nn: u32) -> FiniteGrid {
        enumerate_grid(PrimeDim::new(p, n).unwrap(), m, nn).unwrap()
    }

    #[test]
    fn z2_at_resolution_three() {
        let g = grid(2, 1, 0, 3);
        assert_eq!(g.len(), 8);
        assert_eq!(g.weight(), 0.125);
        assert_eq!(g.total_measure_exact(), Ratio::from_integer(1));
        let total: f64 = g.points().map(|_| g.weight()).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn counting_p3_n2() {
        let g = grid(3, 2, 1, 1);
        assert_eq!(g.len(), 81);
        assert_eq!(g.total_measure_exact(), Ratio::from_integer(9));
        let mut seen = std::collections::HashSet::new();
        for x in g.points() {
            assert!(seen.insert(g.index_of(&x)));
        }
        assert_eq!(seen.len(), 81);
    }

    #[test]
    fn budget_is_enforced() {
        let d = PrimeDim::new(3, 2).unwrap();
        let err = enumerate_grid(d, 4, 4).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { points: 43046721, .. }));
        assert!(FiniteGrid::new(d, 4, 4).unwrap().with_budget(u128::MAX).ensure_enumerable().is_ok());
    }

    #[test]
    fn norm_and_digits() {
        let g = grid(2, 1, 2, 2);
        // X = 4 stands for 4 · 2^{-2} = 1
        let x = g.from_coords(vec![4]);
        assert_eq!(g.norm_exponent(&x), NormExponent::Finite(0));
        assert_eq!(x.digits(&g, 0), vec![0, 0, 1, 0]);
        let y = g.from_coords(vec![1]);
        assert_eq!(g.norm_exponent(&y), NormExponent::Finite(2));
        assert_eq!(g.norm_exponent(&g.zero()), NormExponent::Zero);
        assert_eq!(g.coordinate(&y, 0), PadicRational::new(2, 1, 2));
    }

    #[test]
    fn vector_round_trip() {
        let g = grid(3, 2, 2, 1);
        for x in g.points() {
            let v = g.to_vector(&x);
            assert_eq!(g.from_vector(&v), Some(x));
        }
        let too_fine = PadicVector(vec![PadicRational::new(3, 1, 3), PadicRational::zero(3)]);
        assert_eq!(g.from_vector(&too_fine), None);
    }

    proptest! {
        #[test]
        fn group_laws(a in 0u64..81, b in 0u64..81, c in 0u64..81) {
            let g = grid(3, 1, 2, 2);
            let (x, y, z) = (g.from_coords(vec![a]), g.from_coords(vec![b]), g.from_coords(vec![c]));
            prop_assert_eq!(g.add(&x, &y), g.add(&y, &x));
            prop_assert_eq!(g.add(&g.add(&x, &y), &z), g.add(&x, &g.add(&y, &z)));
            prop_assert!(g.add(&x, &g.neg(&x)).is_zero());
            // grid negation agrees with exact negation modulo p^N
            let exact = g.from_vector(&g.to_vector(&x).neg()).unwrap();
            prop_assert_eq!(exact, g.neg(&x));
        }

        #[test]
        fn ultrametric_norm(a in 0u64..64, b in 0u64..64) {
            let g = grid(2, 1, 3, 3);
            let (x, y) = (g.from_coords(vec![a]), g.from_coords(vec![b]));
            let s = g.norm_exponent(&g.add(&x, &y));
            prop_assert!(s <= g.norm_exponent(&x).max(g.norm_exponent(&y)));
        }
    }
}

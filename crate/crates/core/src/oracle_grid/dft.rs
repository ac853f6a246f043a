use num_complex::Complex64;
use rayon::prelude::*;

use super::Roots;
use crate::error::{Error, Result};
use crate::padic_core::FiniteGrid;

/// Largest `|G|²` the direct transform will attempt.
pub const DIRECT_WORK_LIMIT: u128 = 4_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `f̂(ξ) = Σ_x χ_p(ξ·x) f(x) w`.
    Forward,
    /// `f(x) = Σ_ξ χ_p(−x·ξ) f̂(ξ) w`.
    Inverse,
}

fn check_len(values: &[Complex64], grid: &FiniteGrid) -> Result<()> {
    grid.ensure_enumerable()?;
    if values.len() != grid.len() {
        return Err(Error::InvalidArgument(format!("{} values for a grid of {} points", values.len(), grid.len())));
    }
    Ok(())
}

/// Fourier transform of values on `grid`, returned on `grid.dual()` in its
/// index order. The weight is the input grid's `p^{-nN}`, so the inverse
/// applied to the output uses the dual weight `p^{-nM}`. Direct `O(|G|²)` sum.
pub fn grid_dft(values: &[Complex64], grid: &FiniteGrid, direction: Direction) -> Result<Vec<Complex64>> {
    check_len(values, grid)?;
    let work = grid.point_count().saturating_mul(grid.point_count());
    if work > DIRECT_WORK_LIMIT {
        return Err(Error::BudgetExceeded { points: work, budget: DIRECT_WORK_LIMIT });
    }
    let dual = grid.dual();
    let roots = Roots::new(grid.modulus());
    let w = grid.weight();
    let points: Vec<_> = grid.points().collect();
    Ok((0..dual.len())
        .into_par_iter()
        .map(|i| {
            let xi = dual.point(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, f) in points.iter().zip(values) {
                let r = grid.pairing_residue(x, &xi);
                let c = match direction {
                    Direction::Forward => roots.get(r),
                    Direction::Inverse => roots.get_neg(r),
                };
                acc += c * f;
            }
            acc * w
        })
        .collect())
}

/// Same transform, one axis at a time: the character of `Σ X_i Ξ_i` is the
/// product of one-dimensional characters.
pub fn grid_dft_factored(values: &[Complex64], grid: &FiniteGrid, direction: Direction) -> Result<Vec<Complex64>> {
    check_len(values, grid)?;
    let q = grid.modulus() as usize;
    let roots = Roots::new(grid.modulus());
    let mut cur = values.to_vec();
    let mut stride = 1usize;
    for _ in 0..grid.dims().n() {
        let prev = cur.clone();
        cur.par_iter_mut().enumerate().for_each(|(idx, out)| {
            let digit = (idx / stride) % q;
            let base = idx - digit * stride;
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..q {
                let r = ((digit as u128 * t as u128) % q as u128) as u64;
                let c = match direction {
                    Direction::Forward => roots.get(r),
                    Direction::Inverse => roots.get_neg(r),
                };
                acc += c * prev[base + t * stride];
            }
            *out = acc;
        });
        stride *= q;
    }
    let w = grid.weight();
    cur.iter_mut().for_each(|v| *v *= w);
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic_core::{NormExponent, PrimeDim};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d(p: u32, n: u32) -> PrimeDim {
        PrimeDim::new(p, n).unwrap()
    }

    fn unit_ball_values(grid: &FiniteGrid) -> Vec<Complex64> {
        grid.points()
            .map(|x| {
                let inside = match grid.norm_exponent(&x) {
                    NormExponent::Zero => true,
                    NormExponent::Finite(g) => g <= 0,
                };
                Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
            })
            .collect()
    }

    fn random_values(len: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    #[test]
    fn unit_ball_is_self_dual() {
        let grid = FiniteGrid::new(d(2, 1), 2, 2).unwrap();
        let f = unit_ball_values(&grid);
        let fhat = grid_dft(&f, &grid, Direction::Forward).unwrap();
        let expect = unit_ball_values(&grid.dual());
        for (a, b) in fhat.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn delta_goes_to_constant() {
        let grid = FiniteGrid::new(d(3, 1), 1, 2).unwrap();
        let mut f = vec![Complex64::new(0.0, 0.0); grid.len()];
        f[0] = Complex64::new(1.0 / grid.weight(), 0.0);
        let fhat = grid_dft(&f, &grid, Direction::Forward).unwrap();
        assert!(fhat.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn twice_is_reflection() {
        for (p, n, m, k) in [(2, 1, 2, 2), (3, 1, 1, 2), (2, 2, 1, 1), (3, 2, 1, 0)] {
            let grid = FiniteGrid::new(d(p, n), m, k).unwrap();
            let f = random_values(grid.len(), 3);
            let once = grid_dft(&f, &grid, Direction::Forward).unwrap();
            let twice = grid_dft(&once, &grid.dual(), Direction::Forward).unwrap();
            for x in grid.points() {
                let back = twice[grid.index_of(&x)];
                let reflected = f[grid.index_of(&grid.neg(&x))];
                assert!((back - reflected).norm() < 1e-10);
            }
            let inv = grid_dft(&once, &grid.dual(), Direction::Inverse).unwrap();
            for (a, b) in inv.iter().zip(&f) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn parseval() {
        let grid = FiniteGrid::new(d(3, 2), 1, 1).unwrap();
        let f = random_values(grid.len(), 11);
        let fhat = grid_dft(&f, &grid, Direction::Forward).unwrap();
        let lhs: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.weight();
        let rhs: f64 = fhat.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dual().weight();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn length_mismatch() {
        let grid = FiniteGrid::new(d(2, 1), 1, 1).unwrap();
        assert!(grid_dft(&[Complex64::new(1.0, 0.0)], &grid, Direction::Forward).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn factored_matches_direct(seed in any::<u64>(), which in 0usize..4, inverse in any::<bool>()) {
            let (p, n, m, k) = [(2, 1, 2, 3), (3, 1, 2, 1), (2, 2, 1, 2), (3, 2, 1, 1)][which];
            let grid = FiniteGrid::new(d(p, n), m, k).unwrap();
            let dir = if inverse { Direction::Inverse } else { Direction::Forward };
            let f = random_values(grid.len(), seed);
            let a = grid_dft(&f, &grid, dir).unwrap();
            let b = grid_dft_factored(&f, &grid, dir).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).norm() < 1e-10);
            }
        }
    }
}

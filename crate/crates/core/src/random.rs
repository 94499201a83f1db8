//! Random states and directions for property tests and benchmarks.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::Result;
use crate::fock::{Direction, EulerAngles};
use crate::linalg::{c, dagger, trace, CMatrix, CVector};
use crate::menagerie::{Block, BlockDiagonalState, ManifoldState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Haar-random pure state on manifold `N`.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, photons: usize) -> Result<ManifoldState> {
    let v = CVector::from_fn(photons + 1, |_, _| c(gaussian(rng), gaussian(rng)));
    ManifoldState::pure_normalized(photons, v)
}

/// Ginibre-induced mixed state `G G^dag / Tr` with `rank` columns.
pub fn random_mixed_state<R: Rng + ?Sized>(
    rng: &mut R,
    photons: usize,
    rank: usize,
) -> Result<ManifoldState> {
    let g = CMatrix::from_fn(photons + 1, rank.max(1), |_, _| c(gaussian(rng), gaussian(rng)));
    let rho = &g * dagger(&g);
    let t = trace(&rho);
    ManifoldState::mixed(photons, rho / t)
}

/// Uniform direction on the sphere.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    loop {
        let (x, y, z) = (gaussian(rng), gaussian(rng), gaussian(rng));
        if let Ok(d) = Direction::normalized(x, y, z) {
            return d;
        }
    }
}

/// Euler angles with `Theta` drawn so that `R3 R2 R3` is Haar-distributed.
pub fn random_euler_angles<R: Rng + ?Sized>(rng: &mut R) -> EulerAngles {
    let phi = rng.random_range(-PI..PI);
    let theta = Float::acos(rng.random_range(-1.0..1.0));
    let xi = rng.random_range(-PI..PI);
    EulerAngles::new(phi, theta, xi)
}

/// Block-diagonal state on a random subset of manifolds `0..=max_photons`,
/// with flat-Dirichlet weights and full-rank mixed blocks.
pub fn random_block_state<R: Rng + ?Sized>(
    rng: &mut R,
    max_photons: usize,
) -> Result<BlockDiagonalState> {
    let mut chosen: Vec<usize> = (0..=max_photons).filter(|_| rng.random_bool(0.6)).collect();
    if chosen.is_empty() {
        chosen.push(rng.random_range(0..=max_photons));
    }
    let weights: Vec<f64> = chosen.iter().map(|_| Exp1.sample(rng)).collect();
    let total: f64 = weights.iter().sum();
    let mut blocks = Vec::with_capacity(chosen.len());
    for (&n, w) in chosen.iter().zip(weights) {
        let state = if rng.random_bool(0.3) {
            random_pure_state(rng, n)?
        } else {
            random_mixed_state(rng, n, n + 1)?
        };
        blocks.push(Block {
            probability: w / total,
            state,
        });
    }
    BlockDiagonalState::new(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_objects_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 0..6 {
            let p = random_pure_state(&mut rng, n).unwrap();
            assert!((p.purity() - 1.0).abs() < 1e-12);
            let m = random_mixed_state(&mut rng, n, 2).unwrap();
            assert!(m.purity() <= 1.0 + 1e-12);
            let b = random_block_state(&mut rng, n).unwrap();
            let total: f64 = b.blocks().iter().map(|b| b.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        let d = random_direction(&mut rng);
        assert!((d.dot(&d) - 1.0).abs() < 1e-12);
    }
}

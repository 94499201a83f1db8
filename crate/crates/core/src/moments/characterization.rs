use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::fock::stokes_triple;
use crate::menagerie::{BlockDiagonalState, ManifoldState};

use super::tensor::tensor;

/// `(<S1>, <S2>, <S3>)` on one manifold.
pub fn stokes_vector(state: &ManifoldState) -> Result<Vector3<f64>> {
    let s = stokes_triple(state.photons())?;
    Ok(Vector3::from_fn(|j, _| state.expectation(s[j].matrix()).re))
}

/// `sum_N p_N <S>_N`.
pub fn averaged_stokes_vector(state: &BlockDiagonalState) -> Result<Vector3<f64>> {
    let mut acc = Vector3::zeros();
    for b in state.blocks() {
        acc += stokes_vector(&b.state)? * b.probability;
    }
    Ok(acc)
}

/// `|<S>| / <S0>` from photon-number-averaged first moments.
pub fn degree_of_polarization(state: &BlockDiagonalState) -> Result<f64> {
    let s0 = state.mean_photons();
    if s0 <= 0.0 {
        return Err(Error::Undefined("degree of polarization of the vacuum"));
    }
    Ok(averaged_stokes_vector(state)?.norm() / s0)
}

/// `|<S>_N| / N` for a single manifold.
pub fn manifold_degree_of_polarization(state: &ManifoldState) -> Result<f64> {
    if state.photons() == 0 {
        return Err(Error::Undefined("degree of polarization of the vacuum"));
    }
    Ok(stokes_vector(state)?.norm() / state.photons() as f64)
}

/// `Gamma_jk = Re T_jk - T_j T_k` on one manifold.
pub fn covariance_matrix(state: &ManifoldState) -> Result<Matrix3<f64>> {
    let t2 = tensor(state, 2)?;
    let s = stokes_vector(state)?;
    Ok(Matrix3::from_fn(|j, k| t2.at(&[j + 1, k + 1]).re - s[j] * s[k]))
}

/// Covariance of the block with `N` photons; undefined when `p_N = 0`.
pub fn manifold_covariance(state: &BlockDiagonalState, photons: usize) -> Result<Matrix3<f64>> {
    let block = state.block(photons).ok_or(Error::MissingManifold(photons))?;
    covariance_matrix(&block.state)
}

/// `sum_N p_N Gamma_N`.
pub fn averaged_covariance(state: &BlockDiagonalState) -> Result<Matrix3<f64>> {
    let mut acc = Matrix3::zeros();
    for b in state.blocks() {
        acc += covariance_matrix(&b.state)? * b.probability;
    }
    Ok(acc)
}

/// `<S0 (S0 + 2)>`.
pub fn casimir_mean(state: &BlockDiagonalState) -> f64 {
    state.photon_moment(2) + 2.0 * state.photon_moment(1)
}

/// `<S1^2 + S2^2 + S3^2> - |<S>|^2` over the whole state.
pub fn variance_sum(state: &BlockDiagonalState) -> Result<f64> {
    Ok(casimir_mean(state) - averaged_stokes_vector(state)?.norm_squared())
}

/// `(2 <S0>, <S0 (S0 + 2)>)`, the bounds on [`variance_sum`].
pub fn uncertainty_bounds(state: &BlockDiagonalState) -> (f64, f64) {
    (2.0 * state.mean_photons(), casimir_mean(state))
}

/// Parameter counts up to a photon-number cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParameterCounts {
    /// `-1 + sum_{N <= cutoff} (N + 1)^2` by enumeration.
    pub block_diagonal: usize,
    /// `c (2c^2 + 9c + 13) / 6`.
    pub block_diagonal_closed_form: usize,
    /// `c (c + 3)(c^2 + 3c + 4) / 4`, the count without block structure.
    pub full_state: usize,
}

pub fn count_parameters(cutoff: usize) -> ParameterCounts {
    let manifolds: alloc::vec::Vec<usize> = (0..=cutoff).collect();
    ParameterCounts {
        block_diagonal: block_diagonal_parameters(&manifolds).unwrap_or(0),
        block_diagonal_closed_form: cutoff * (2 * cutoff * cutoff + 9 * cutoff + 13) / 6,
        full_state: cutoff * (cutoff + 3) * (cutoff * cutoff + 3 * cutoff + 4) / 4,
    }
}

/// `-1 + sum_k (N_k + 1)^2` for distinct manifolds.
pub fn block_diagonal_parameters(manifolds: &[usize]) -> Result<usize> {
    let mut sorted = manifolds.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateManifold(w[0]));
    }
    if sorted.is_empty() {
        return Ok(0);
    }
    Ok(sorted.iter().map(|n| (n + 1) * (n + 1)).sum::<usize>() - 1)
}

/// Independent moment components of one order, `2r + 1`.
pub fn independent_components(order: usize) -> usize {
    2 * order + 1
}

/// Parameters of one manifold, `N(N+2)`.
pub fn manifold_parameters(photons: usize) -> usize {
    photons * (photons + 2)
}

/// Independent averaged moment parameters through order `R`,
/// `R (R^2 + 6R + 11) / 6`.
pub fn averaged_parameters(order: usize) -> usize {
    order * (order * order + 6 * order + 11) / 6
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::menagerie::{single_photon_density, su2_coherent, twin_fock, unpolarized_two_photon, Block};
    use crate::random::{random_block_state, random_mixed_state};
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn polarization_degree_laws() {
        for n in 1..6 {
            let st = BlockDiagonalState::single(ManifoldState::fock(n, 0));
            assert!((degree_of_polarization(&st).unwrap() - 1.0).abs() < 1e-12);
            let coh = su2_coherent(n, 1.1, 0.4).unwrap();
            assert!((manifold_degree_of_polarization(&coh).unwrap() - 1.0).abs() < 1e-12);
        }
        for m in 1..4 {
            assert!(manifold_degree_of_polarization(&twin_fock(m)).unwrap() < 1e-12);
        }
        let rho = single_photon_density(0.7, 0.1, -0.2).unwrap();
        let expected = (2.0 * rho.purity() - 1.0).sqrt();
        assert!((manifold_degree_of_polarization(&rho).unwrap() - expected).abs() < 1e-12);
        let psi = unpolarized_two_photon(0.4, 1.3).unwrap();
        assert!(manifold_degree_of_polarization(&psi).unwrap() < 1e-12);
        assert!(matches!(
            degree_of_polarization(&BlockDiagonalState::single(ManifoldState::vacuum())),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn covariance_examples() {
        for n in 0..5 {
            let g = covariance_matrix(&ManifoldState::fock(n, 0)).unwrap();
            let nn = n as f64;
            assert!((g - Matrix3::from_diagonal(&Vector3::new(nn, nn, 0.0))).abs().max() < 1e-10);
        }
        let tf = twin_fock(2);
        let t2 = tensor(&tf, 2).unwrap();
        let g = covariance_matrix(&tf).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert!((g[(j, k)] - t2.at(&[j + 1, k + 1]).re).abs() < 1e-12);
            }
        }
        let st = BlockDiagonalState::single(tf);
        assert!(matches!(manifold_covariance(&st, 3), Err(Error::MissingManifold(3))));
    }

    #[test]
    fn uncertainty_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let st = random_block_state(&mut rng, 5).unwrap();
            let (lo, hi) = uncertainty_bounds(&st);
            let v = variance_sum(&st).unwrap();
            assert!(lo - 1e-9 <= v && v <= hi + 1e-9);
            let s = averaged_stokes_vector(&st).unwrap();
            let spec_form = averaged_covariance(&st).unwrap().trace() + s.norm_squared();
            assert!(lo - 1e-9 <= spec_form && spec_form <= hi + 1e-9);
        }
        for n in 0..6 {
            let st = BlockDiagonalState::single(su2_coherent(n, 0.8, 2.0).unwrap());
            assert!((variance_sum(&st).unwrap() - 2.0 * n as f64).abs() < 1e-10);
        }
        let mixed = random_mixed_state(&mut rng, 3, 2).unwrap();
        let st = BlockDiagonalState::new(vec![
            Block { probability: 0.5, state: mixed },
            Block { probability: 0.5, state: ManifoldState::vacuum() },
        ])
        .unwrap();
        assert!(variance_sum(&st).unwrap() >= uncertainty_bounds(&st).0);
    }

    #[test]
    fn parameter_counts() {
        let c = count_parameters(2);
        assert_eq!(c.block_diagonal, 13);
        assert_eq!(c.block_diagonal_closed_form, 13);
        for cutoff in 0..12 {
            let c = count_parameters(cutoff);
            assert_eq!(c.block_diagonal, c.block_diagonal_closed_form);
            let dim = (cutoff + 1) * (cutoff + 2) / 2;
            assert_eq!(c.full_state, dim * dim - 1);
        }
        assert_eq!(independent_components(2), 5);
        assert_eq!(manifold_parameters(2), 8);
        assert_eq!(averaged_parameters(2), 9);
        assert_eq!(block_diagonal_parameters(&[1, 3]).unwrap(), 4 + 16 - 1);
        assert!(block_diagonal_parameters(&[1, 1]).is_err());
        for n in 0..8 {
            let per_order: usize = (1..=n).map(independent_components).sum();
            assert_eq!(per_order, manifold_parameters(n));
        }
    }
}

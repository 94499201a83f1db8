use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SVD};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::Direction;
use crate::linalg::real_least_squares;
use crate::moments::{casimir_rhs, laplacian_map, MomentComponents, PolarizationTensor};

use super::directions::{constraint_basis, design_matrix, RANK_TOL};

/// Second-order components from `<S_ni^2>` on the five icosahedral lines,
/// in the order returned by `icosahedral_directions`, with the Casimir value
/// `N(N+2)`.
pub fn closed_form_second_order(measured: &[f64; 5], photons: usize) -> MomentComponents {
    closed_form_second_order_with_casimir(measured, (photons * (photons + 2)) as f64, Some(photons))
}

/// As [`closed_form_second_order`] with an explicit `<S0 (S0 + 2)>`, which
/// covers photon-number-averaged data.
pub fn closed_form_second_order_with_casimir(
    measured: &[f64; 5],
    casimir: f64,
    photons: Option<usize>,
) -> MomentComponents {
    let s5 = Float::sqrt(5.0);
    let q = measured;
    let c = casimir;
    let a = q[0] + q[1];
    let b = q[2] + q[3];
    let den = 4.0 * (7.0 + 3.0 * s5);
    let m00 = ((15.0 + 7.0 * s5) * a - (10.0 + 4.0 * s5) * b + (6.0 + 2.0 * s5) * c) / den;
    let m01 = s5 / 2.0 * (q[0] - q[1]);
    let m02 = ((10.0 + 4.0 * s5) * a + (25.0 + 11.0 * s5) * b - (14.0 + 6.0 * s5) * c) / den;
    let m10 = s5 / 2.0 * (a + b + 2.0 * q[4]) - s5 * c;
    let m11 = s5 / 2.0 * (q[2] - q[3]);
    let m20 = ((36.0 + 16.0 * s5) * c - (25.0 + 11.0 * s5) * a - (15.0 + 7.0 * s5) * b) / den;
    MomentComponents::new(2, photons, alloc::vec![m00, m01, m02, m10, m11, m20])
        .unwrap_or_else(|_| MomentComponents::zeros(2, photons))
}

/// Solver output with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSolution {
    pub components: MomentComponents,
    /// `sigma_max / sigma_min` of the reduced design.
    pub condition_number: f64,
    /// Euclidean norm of `D M - y`.
    pub residual: f64,
    pub singular_values: Vec<f64>,
}

/// Order-`r` moment components on manifold `N` from directional moments.
///
/// The Laplacian of the profile is fixed by lower-order data, which removes
/// `m_(r-2)` unknowns: `M = M_p + K z` with `K` spanning the free
/// `2r + 1`-dimensional subspace, and `z` solves the reduced least-squares
/// problem. `lower[j]` must hold the order-`j` tensor for `j < r` when
/// `r >= 3`; order 2 needs only `N`.
pub fn solve_moment_components(
    directions: &[Direction],
    measured: &[f64],
    photons: usize,
    order: usize,
    lower: &[PolarizationTensor],
) -> Result<MomentSolution> {
    if directions.len() != measured.len() {
        return Err(Error::DimensionMismatch {
            expected: directions.len(),
            found: measured.len(),
        });
    }
    let y = DVector::from_column_slice(measured);
    let d = design_matrix(directions, order);
    let k = constraint_basis(order);
    let particular = if order < 2 {
        DVector::zeros(MomentComponents::count(order))
    } else {
        let rhs = laplacian_rhs(photons, order, lower)?;
        let (x, _) = real_least_squares(&laplacian_map(order)?, &DVector::from_column_slice(rhs.values()), RANK_TOL);
        x
    };
    let reduced = &d * &k;
    let needed = k.ncols();
    let rows = reduced.nrows().max(needed);
    let mut padded = DMatrix::zeros(rows, needed);
    padded.view_mut((0, 0), (reduced.nrows(), needed)).copy_from(&reduced);
    let svd = SVD::new(padded, true, true);
    let mut order_idx: Vec<usize> = (0..needed).collect();
    order_idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order_idx.iter().map(|&i| svd.singular_values[i]).collect();
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * top).count();
    let condition_number = match sv.last() {
        Some(&lo) if lo > 0.0 => top / lo,
        _ => f64::INFINITY,
    };
    if rank < needed {
        let v_t = svd.v_t.as_ref().ok_or(Error::Spectrum("SVD without right vectors".into()))?;
        let pairs = MomentComponents::pairs(order);
        let mut deficient = Vec::new();
        for &i in order_idx.iter().skip(rank) {
            let z = v_t.row(i).transpose();
            let m = &k * z;
            let j = m.iamax();
            if !deficient.contains(&pairs[j]) {
                deficient.push(pairs[j]);
            }
        }
        return Err(Error::RankDeficient {
            rank,
            expected: needed,
            condition: condition_number,
            deficient,
        });
    }
    let target = &y - &d * &particular;
    let (z, _) = real_least_squares(&reduced, &target, RANK_TOL);
    let m = particular + &k * z;
    let residual = (&d * &m - &y).norm();
    Ok(MomentSolution {
        components: MomentComponents::new(order, Some(photons), m.iter().copied().collect())?,
        condition_number,
        residual,
        singular_values: sv,
    })
}

fn laplacian_rhs(photons: usize, order: usize, lower: &[PolarizationTensor]) -> Result<MomentComponents> {
    let zero_first;
    let unit;
    let (first, second) = if order == 2 {
        unit = PolarizationTensor::unit(Some(photons));
        zero_first = PolarizationTensor::zeros(1, Some(photons))?;
        (lower.get(1).unwrap_or(&zero_first), lower.first().unwrap_or(&unit))
    } else {
        let first = lower.get(order - 1).ok_or(Error::MissingOrder(order - 1))?;
        let second = lower.get(order - 2).ok_or(Error::MissingOrder(order - 2))?;
        (first, second)
    };
    if first.order() != order - 1 || second.order() != order - 2 {
        return Err(Error::MissingOrder(order - 1));
    }
    casimir_rhs(photons, first, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::menagerie::ManifoldState;
    use crate::moments::{direct_profile, moment_components, tensor};
    use crate::random::{random_mixed_state, random_pure_state};
    use crate::tomography::directions::{
        icosahedral_directions, stokes_axes, symmetric_third_order_directions, working_directions,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn measured(st: &ManifoldState, dirs: &[Direction], r: usize) -> Vec<f64> {
        dirs.iter().map(|d| direct_profile(st, r, d).unwrap()).collect()
    }

    fn lower_tensors(st: &ManifoldState, r: usize) -> Vec<PolarizationTensor> {
        (0..r).map(|j| tensor(st, j).unwrap()).collect()
    }

    #[test]
    fn closed_form_second_order_matches_tensor_path() {
        let ico = icosahedral_directions();
        let q: Vec<f64> = measured(&ManifoldState::fock(2, 0), &ico, 2);
        let m = closed_form_second_order(&q.clone().try_into().unwrap(), 2);
        let expected = [4.0, 0.0, 2.0, 0.0, 0.0, 2.0];
        for (a, b) in m.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let m0 = closed_form_second_order(&[0.0; 5], 0);
        assert!(m0.values().iter().all(|v| v.abs() < 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let st = random_pure_state(&mut rng, 2).unwrap();
            let q: [f64; 5] = measured(&st, &ico, 2).try_into().unwrap();
            let direct = moment_components(&tensor(&st, 2).unwrap()).unwrap();
            assert!(closed_form_second_order(&q, 2).max_abs_diff(&direct) < 1e-9);
            let solved = solve_moment_components(&ico, &q, 2, 2, &[]).unwrap();
            assert!(solved.components.max_abs_diff(&direct) < 1e-9);
        }
    }

    #[test]
    fn first_order_on_axes_returns_the_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let st = random_mixed_state(&mut rng, 3, 2).unwrap();
        let axes = stokes_axes();
        let y = measured(&st, &axes, 1);
        let m = solve_moment_components(&axes, &y, 3, 1, &[]).unwrap().components;
        assert!((m.get(1, 0) - y[0]).abs() < 1e-12);
        assert!((m.get(0, 1) - y[1]).abs() < 1e-12);
        assert!((m.get(0, 0) - y[2]).abs() < 1e-12);
    }

    #[test]
    fn higher_orders_are_recovered_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 0..=5 {
            let st = random_mixed_state(&mut rng, n, 2).unwrap();
            for r in 1..=5 {
                let set = working_directions(r).unwrap();
                let y = measured(&st, &set.directions, r);
                let sol = solve_moment_components(&set.directions, &y, n, r, &lower_tensors(&st, r)).unwrap();
                let direct = moment_components(&tensor(&st, r).unwrap()).unwrap();
                let scale = direct.values().iter().fold(1.0f64, |a, b| a.max(b.abs()));
                assert!(sol.components.max_abs_diff(&direct) < 1e-8 * scale, "N={n} r={r}");
                assert!(sol.residual < 1e-8 * scale);
            }
        }
    }

    #[test]
    fn symmetric_third_order_set_fails_with_rank_four() {
        let st = random_pure_state(&mut ChaCha8Rng::seed_from_u64(5), 3).unwrap();
        let dirs = symmetric_third_order_directions();
        let y = measured(&st, &dirs, 3);
        match solve_moment_components(&dirs, &y, 3, 3, &lower_tensors(&st, 3)) {
            Err(Error::RankDeficient { rank, expected, deficient, .. }) => {
                assert_eq!(rank, 4);
                assert_eq!(expected, 7);
                assert!(!deficient.is_empty());
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        let few = &stokes_axes()[..2];
        assert!(matches!(
            solve_moment_components(few, &[0.0, 0.0], 1, 1, &[]),
            Err(Error::RankDeficient { rank: 2, .. })
        ));
        assert!(solve_moment_components(&dirs, &y, 3, 4, &lower_tensors(&st, 2)).is_err());
    }

    #[test]
    fn antipodal_directions_give_identical_components() {
        let st = random_mixed_state(&mut ChaCha8Rng::seed_from_u64(6), 3, 2).unwrap();
        for r in 1..=3 {
            let set = working_directions(r).unwrap();
            let flipped: Vec<Direction> = set.directions.iter().map(|d| -*d).collect();
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            let y = measured(&st, &set.directions, r);
            let yf: Vec<f64> = y.iter().map(|v| sign * v).collect();
            let a = solve_moment_components(&set.directions, &y, 3, r, &lower_tensors(&st, r)).unwrap();
            let b = solve_moment_components(&flipped, &yf, 3, r, &lower_tensors(&st, r)).unwrap();
            assert!(a.components.max_abs_diff(&b.components) < 1e-9);
        }
    }
}

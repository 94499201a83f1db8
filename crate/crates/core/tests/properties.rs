use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stokes_core::linalg::{self, c, commutator, max_abs_diff, project_psd, CMatrix};
use stokes_core::moments::{
    averaged_covariance, casimir_mean, direct_profile, moment_components, tensor, uncertainty_bounds,
    variance_sum, StokesProfile,
};
use stokes_core::random::{random_block_state, random_direction, random_euler_angles, random_mixed_state};
use stokes_core::tomography::{
    assemble_all_tensors, outcome_distribution, reconstruct_density, simulate_measurement, simulate_shot_range,
    MeasurementSetting,
};
use stokes_core::{stokes_operator, su2_unitary, Direction};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stokes_algebra_holds(n in 0usize..=10) {
        let s: Vec<CMatrix> = (0..4).map(|j| stokes_operator(j, n).unwrap().into_matrix()).collect();
        for (a, b, cc) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
            let lhs = commutator(&s[a], &s[b]);
            prop_assert!(max_abs_diff(&lhs, &(&s[cc] * c(0.0, 2.0))) < 1e-10);
        }
        for j in 1..4 {
            prop_assert!(linalg::max_abs(&commutator(&s[0], &s[j])) < 1e-10);
        }
        let casimir = &s[1] * &s[1] + &s[2] * &s[2] + &s[3] * &s[3];
        let expected = &s[0] * (&s[0] + CMatrix::identity(n + 1, n + 1) * c(2.0, 0.0));
        prop_assert!(max_abs_diff(&casimir, &expected) < 1e-10);
    }

    #[test]
    fn profiles_agree_with_components(seed in any::<u64>(), n in 0usize..=5, r in 1usize..=5) {
        let mut g = rng(seed);
        let st = random_mixed_state(&mut g, n, 2).unwrap();
        let profile = StokesProfile::of_state(&st, r).unwrap();
        for _ in 0..5 {
            let d = random_direction(&mut g);
            let a = profile.eval(&d);
            let b = direct_profile(&st, r, &d).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn profiles_rotate_with_the_state(seed in any::<u64>(), n in 1usize..=4, r in 1usize..=4) {
        let mut g = rng(seed);
        let st = random_mixed_state(&mut g, n, 2).unwrap();
        let angles = random_euler_angles(&mut g);
        let rotated = st.apply_su2(&angles).unwrap();
        let d = random_direction(&mut g);
        let moved = d.rotated(&angles.rotation());
        let a = direct_profile(&rotated, r, &moved).unwrap();
        let b = direct_profile(&st, r, &d).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
    }

    #[test]
    fn antipodal_outcomes_are_reversed(seed in any::<u64>(), n in 0usize..=6) {
        let mut g = rng(seed);
        let st = random_mixed_state(&mut g, n, 3).unwrap();
        let d = random_direction(&mut g);
        let p = outcome_distribution(&st, &d).unwrap();
        let q = outcome_distribution(&st, &-d).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (a, b) in p.iter().zip(q.iter().rev()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn assembly_and_inversion_round_trip(seed in any::<u64>(), n in 1usize..=4) {
        let mut g = rng(seed);
        let st = random_mixed_state(&mut g, n, 1 + (seed as usize) % (n + 1)).unwrap();
        let comps: Vec<_> = (1..=n).map(|r| moment_components(&tensor(&st, r).unwrap()).unwrap()).collect();
        let tensors = assemble_all_tensors(&comps, n).unwrap();
        for (r, t) in tensors.iter().enumerate() {
            let direct = tensor(&st, r + 1).unwrap();
            prop_assert!(t.max_abs_diff(&direct) < 1e-8 * direct.max_abs().max(1.0));
        }
        let rec = reconstruct_density(&tensors, n).unwrap();
        prop_assert!(rec.state.trace_distance(&st).unwrap() < 1e-7);
    }

    #[test]
    fn psd_projection_is_physical(seed in any::<u64>(), n in 1usize..=5, noise in 0.0f64..0.5) {
        let mut g = rng(seed);
        let st = random_mixed_state(&mut g, n, 1).unwrap();
        let d = n + 1;
        let other = random_mixed_state(&mut g, n, d).unwrap();
        let perturbed = st.density() * c(1.0 + noise, 0.0) - other.density() * c(noise, 0.0);
        let p = project_psd(&perturbed);
        prop_assert!((linalg::trace(&p.density).re - 1.0).abs() < 1e-12);
        prop_assert!(linalg::min_eigenvalue(&p.density) > -1e-12);
        prop_assert!(p.distance >= 0.0);
    }

    #[test]
    fn uncertainty_relation_holds(seed in any::<u64>(), max in 0usize..=5) {
        let mut g = rng(seed);
        let st = random_block_state(&mut g, max).unwrap();
        let v = variance_sum(&st).unwrap();
        let (lower, upper) = uncertainty_bounds(&st);
        prop_assert!(v >= lower - 1e-9);
        prop_assert!(v <= upper + 1e-9);
        let cov = averaged_covariance(&st).unwrap();
        prop_assert!(cov.trace() <= v + 1e-9 * upper.max(1.0));
        prop_assert!((upper - casimir_mean(&st)).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_partition_independent(seed in any::<u64>(), split in 1u64..999, stream in 0u64..16) {
        let mut g = rng(seed);
        let st = random_block_state(&mut g, 3).unwrap();
        let setting = MeasurementSetting::new(random_direction(&mut g), 1000, seed, stream).unwrap();
        let whole = simulate_measurement(&st, &setting).unwrap();
        let mut parts = simulate_shot_range(&st, &setting, 0..split).unwrap();
        parts.merge(&simulate_shot_range(&st, &setting, split..1000).unwrap());
        prop_assert_eq!(whole.total(), 1000);
        prop_assert_eq!(whole.counts, parts.counts);
    }

    #[test]
    fn su2_unitaries_are_unitary(seed in any::<u64>(), n in 0usize..=8) {
        let mut g = rng(seed);
        let u = su2_unitary(&random_euler_angles(&mut g), n).unwrap().into_matrix();
        let id = CMatrix::identity(n + 1, n + 1);
        prop_assert!(max_abs_diff(&(u.adjoint() * &u), &id) < 1e-12);
    }
}

#[test]
fn axis_directions_are_exact() {
    for j in 1..=3 {
        let d = Direction::axis(j).unwrap();
        assert_eq!(d.dot(&d), 1.0);
    }
}

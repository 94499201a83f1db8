use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::menagerie::{BlockDiagonalState, ManifoldState};
use crate::moments::{MomentComponents, PolarizationTensor, MAX_TENSOR_ORDER};

use super::directions::{choose_directions, working_directions, DirectionRationale, DirectionSet};
use super::inversion::solve_moment_components;
use super::measurement::{
    distribution_moment, estimate_moments, outcome_distribution, simulate_measurement, MeasurementRecord,
    MeasurementSetting,
};
use super::reconstruction::reconstruct_density;

/// Exact distribution moments, or sampled shots per setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotMode {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

/// Which third-order set to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThirdOrderChoice {
    #[default]
    Fallback,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TomographyConfig {
    pub mode: ShotMode,
    /// Largest manifold reconstructed; heavier blocks are reported as skipped.
    pub max_photons: usize,
    pub third_order: ThirdOrderChoice,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            mode: ShotMode::Exact,
            max_photons: 3,
            third_order: ThirdOrderChoice::Fallback,
        }
    }
}

/// Directional moments of one order for every observed manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalMoments {
    pub set: DirectionSet,
    /// `values[N][i] = <S_ni^r>_N`.
    pub values: BTreeMap<usize, Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldDiagnostics {
    /// Worst reduced-design condition number over the orders used.
    pub condition_number: f64,
    pub projection_distance: f64,
    /// Worst solver residual over the orders used.
    pub residual: f64,
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldReconstruction {
    pub photons: usize,
    pub probability: f64,
    /// Orders `1..=N`.
    pub components: Vec<MomentComponents>,
    /// Orders `1..=N`.
    pub tensors: Vec<PolarizationTensor>,
    pub state: ManifoldState,
    pub diagnostics: ManifoldDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub manifolds: Vec<ManifoldReconstruction>,
    /// Observed manifolds above the cutoff, or missing from some sampled setting.
    pub skipped: Vec<usize>,
    pub direction_sets: Vec<DirectionSet>,
    pub settings: Vec<MeasurementSetting>,
    /// Raw counts, one per setting; empty in exact mode.
    pub records: Vec<MeasurementRecord>,
}

fn direction_set(order: usize, choice: ThirdOrderChoice) -> Result<DirectionSet> {
    if order == 3 && choice == ThirdOrderChoice::Symmetric {
        return choose_directions(3)?
            .into_iter()
            .find(|s| s.rationale == DirectionRationale::SymmetricRankDeficient)
            .ok_or(Error::MissingOrder(3));
    }
    working_directions(order)
}

/// Measures every order up to the largest reconstructed manifold and inverts
/// manifold by manifold.
pub fn run_tomography(state: &BlockDiagonalState, config: &TomographyConfig) -> Result<ReconstructionResult> {
    let cutoff = config.max_photons.min(MAX_TENSOR_ORDER);
    let top = state.manifolds().into_iter().filter(|&n| n <= cutoff).max().unwrap_or(0);
    let mut sets = Vec::new();
    let mut settings = Vec::new();
    let mut records = Vec::new();
    let mut data = Vec::new();
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut total_shots = 0u64;
    for order in 1..=top {
        let set = direction_set(order, config.third_order)?;
        let mut values: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for d in &set.directions {
            match config.mode {
                ShotMode::Exact => {
                    for b in state.blocks() {
                        let p = outcome_distribution(&b.state, d)?;
                        values
                            .entry(b.photons())
                            .or_default()
                            .push(distribution_moment(&p, b.photons(), order));
                    }
                }
                ShotMode::Sampled { shots, seed } => {
                    let setting = MeasurementSetting::new(*d, shots, seed, settings.len() as u64)?;
                    let record = simulate_measurement(state, &setting)?;
                    let est = estimate_moments(&record, &[order])?;
                    total_shots += shots;
                    for (n, m) in &est.manifolds {
                        *counts.entry(*n).or_insert(0) += m.count;
                    }
                    let index = values.values().map(Vec::len).max().unwrap_or(0);
                    for (n, m) in est.manifolds {
                        let v = values.entry(n).or_default();
                        v.resize(index, f64::NAN);
                        v.push(m.moments[&order].value);
                    }
                    settings.push(setting);
                    records.push(record);
                }
            }
        }
        let len = set.directions.len();
        for v in values.values_mut() {
            v.resize(len, f64::NAN);
        }
        data.push(DirectionalMoments { set: set.clone(), values });
        sets.push(set);
    }
    let probabilities: BTreeMap<usize, f64> = match config.mode {
        ShotMode::Exact => state.blocks().iter().map(|b| (b.photons(), b.probability)).collect(),
        ShotMode::Sampled { .. } if total_shots > 0 => counts
            .iter()
            .map(|(&n, &c)| (n, c as f64 / total_shots as f64))
            .collect(),
        ShotMode::Sampled { .. } => state.blocks().iter().map(|b| (b.photons(), b.probability)).collect(),
    };
    let mut manifolds = Vec::new();
    let mut skipped = Vec::new();
    for (&n, &p) in &probabilities {
        if n > cutoff {
            skipped.push(n);
            continue;
        }
        match reconstruct_manifold(n, p, &data) {
            Ok(m) => manifolds.push(m),
            Err(Error::MissingManifold(_)) if matches!(config.mode, ShotMode::Sampled { .. }) => skipped.push(n),
            Err(e) => return Err(e),
        }
    }
    Ok(ReconstructionResult {
        manifolds,
        skipped,
        direction_sets: sets,
        settings,
        records,
    })
}

/// Solves, assembles and inverts one manifold from its directional moments.
pub fn reconstruct_manifold(photons: usize, probability: f64, data: &[DirectionalMoments]) -> Result<ManifoldReconstruction> {
    let mut components = Vec::with_capacity(photons);
    let mut tensors: Vec<PolarizationTensor> = alloc::vec![PolarizationTensor::unit(Some(photons))];
    let mut condition_number: f64 = 1.0;
    let mut residual: f64 = 0.0;
    for order in 1..=photons {
        let moments = data
            .iter()
            .find(|m| m.set.order == order)
            .ok_or(Error::MissingOrder(order))?;
        let y = moments.values.get(&photons).ok_or(Error::MissingManifold(photons))?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::MissingManifold(photons));
        }
        let sol = solve_moment_components(&moments.set.directions, y, photons, order, &tensors)?;
        condition_number = condition_number.max(sol.condition_number);
        residual = residual.max(sol.residual);
        let t = next_tensor(&sol.components, &tensors[order - 1])?;
        tensors.push(t);
        components.push(sol.components);
    }
    let tensors: Vec<PolarizationTensor> = tensors.into_iter().skip(1).collect();
    let rec = if photons == 0 {
        None
    } else {
        Some(reconstruct_density(&tensors, photons)?)
    };
    let (state, projection_distance, clipped) = match rec {
        Some(r) => (r.state, r.projection_distance, r.clipped),
        None => (ManifoldState::vacuum(), 0.0, false),
    };
    Ok(ManifoldReconstruction {
        photons,
        probability,
        components,
        tensors,
        state,
        diagnostics: ManifoldDiagnostics {
            condition_number,
            projection_distance,
            residual,
            clipped,
        },
    })
}

fn next_tensor(m: &MomentComponents, lower: &PolarizationTensor) -> Result<PolarizationTensor> {
    match m.order() {
        2 => crate::moments::assemble_tensor_order2(m, lower),
        3 => crate::moments::assemble_tensor_order3(m, lower),
        _ => crate::moments::assemble_tensor(m, lower),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::EulerAngles;
    use crate::menagerie::{noon, su2_coherent, transformed_twin_fock, twin_fock, unpolarized_two_photon, Block};
    use crate::random::random_mixed_state;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check_exact(st: &BlockDiagonalState) {
        let res = run_tomography(st, &TomographyConfig::default()).unwrap();
        for m in &res.manifolds {
            let truth = &st.block(m.photons).unwrap().state;
            assert!(m.state.trace_distance(truth).unwrap() < 1e-7, "N={}", m.photons);
            assert!((m.probability - st.probability(m.photons)).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_pipeline_on_small_states() {
        for n in 1..=3 {
            check_exact(&BlockDiagonalState::single(su2_coherent(n, 0.7, 1.9).unwrap()));
            check_exact(&BlockDiagonalState::single(noon(n).unwrap()));
        }
        check_exact(&BlockDiagonalState::single(twin_fock(1)));
        check_exact(&BlockDiagonalState::single(transformed_twin_fock(1, &EulerAngles::new(0.3, 1.2, 0.0)).unwrap()));
        check_exact(&BlockDiagonalState::single(unpolarized_two_photon(0.3, 0.8).unwrap()));
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mixed = BlockDiagonalState::new(vec![
            Block { probability: 0.1, state: ManifoldState::vacuum() },
            Block { probability: 0.2, state: random_mixed_state(&mut rng, 1, 2).unwrap() },
            Block { probability: 0.3, state: random_mixed_state(&mut rng, 2, 3).unwrap() },
            Block { probability: 0.4, state: random_mixed_state(&mut rng, 3, 4).unwrap() },
        ])
        .unwrap();
        check_exact(&mixed);
    }

    #[test]
    fn heavy_manifolds_are_skipped_and_symmetric_set_fails() {
        let st = BlockDiagonalState::new(vec![
            Block { probability: 0.5, state: ManifoldState::fock(2, 0) },
            Block { probability: 0.5, state: ManifoldState::fock(5, 0) },
        ])
        .unwrap();
        let res = run_tomography(&st, &TomographyConfig::default()).unwrap();
        assert_eq!(res.skipped, vec![5]);
        assert_eq!(res.manifolds.len(), 1);
        let cfg = TomographyConfig {
            third_order: ThirdOrderChoice::Symmetric,
            ..TomographyConfig::default()
        };
        let st = BlockDiagonalState::single(noon(3).unwrap());
        assert!(matches!(run_tomography(&st, &cfg), Err(Error::RankDeficient { rank: 4, .. })));
    }

    #[test]
    fn sampled_pipeline_is_physical_and_close() {
        let st = BlockDiagonalState::single(su2_coherent(2, 1.0, 0.5).unwrap());
        let cfg = TomographyConfig {
            mode: ShotMode::Sampled { shots: 20_000, seed: 3 },
            ..TomographyConfig::default()
        };
        let a = run_tomography(&st, &cfg).unwrap();
        let b = run_tomography(&st, &cfg).unwrap();
        assert_eq!(a, b);
        let m = &a.manifolds[0];
        let rho = m.state.density();
        assert!((crate::linalg::trace(&rho).re - 1.0).abs() < 1e-12);
        assert!(crate::linalg::min_eigenvalue(&rho) > -1e-12);
        assert!(m.state.trace_distance(&st.blocks()[0].state).unwrap() < 0.1);
        assert_eq!(a.settings.len(), 3 + 5);
    }
}

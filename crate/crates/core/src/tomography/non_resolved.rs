//! Tomography without photon-number resolution for states supported on
//! `N <= 2`. Only photon-number-averaged moments are available; the
//! manifold contributions are separated through the spectra of `S_n` on the
//! one- and two-photon manifolds.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::menagerie::{BlockDiagonalState, ManifoldState};
use crate::moments::MomentComponents;

use super::directions::{icosahedral_directions, stokes_axes};
use super::inversion::{closed_form_second_order, closed_form_second_order_with_casimir};
use super::measurement::{distribution_moment, outcome_distribution};
use super::reconstruction::{assemble_all_tensors, reconstruct_density};

const NEGATIVE_TOL: f64 = 1e-9;
const PRESENT_TOL: f64 = 1e-12;

/// Photon-number-averaged data a non-resolving setup records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedData {
    /// `<S_j>` on the axes `j = 1, 2, 3`.
    pub first: [f64; 3],
    /// `<S_j^3>` on the axes.
    pub third: [f64; 3],
    /// `<S_n^2>` on the icosahedral lines.
    pub second: [f64; 5],
    pub s0: f64,
    pub s0_squared: f64,
}

/// Exact averaged data of a block-diagonal state on `N <= 2`.
pub fn averaged_data(state: &BlockDiagonalState) -> Result<AveragedData> {
    if state.max_photons() > 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "non-resolved inversion needs support on N <= 2, found N = {}",
            state.max_photons()
        )));
    }
    let avg = |dirs: &[crate::fock::Direction], order: usize| -> Result<Vec<f64>> {
        dirs.iter()
            .map(|d| {
                let mut acc = 0.0;
                for b in state.blocks() {
                    let p = outcome_distribution(&b.state, d)?;
                    acc += b.probability * distribution_moment(&p, b.photons(), order);
                }
                Ok(acc)
            })
            .collect()
    };
    let axes = stokes_axes();
    let mut out = AveragedData {
        first: [0.0; 3],
        third: [0.0; 3],
        second: [0.0; 5],
        s0: state.photon_moment(1),
        s0_squared: state.photon_moment(2),
    };
    out.first.copy_from_slice(&avg(&axes, 1)?);
    out.third.copy_from_slice(&avg(&axes, 3)?);
    out.second.copy_from_slice(&avg(&icosahedral_directions(), 2)?);
    Ok(out)
}

/// `(p0, p1, p2)` from `<S0>` and `<S0^2>`.
pub fn manifold_probabilities(s0: f64, s0_squared: f64) -> Result<[f64; 3]> {
    let p1 = 2.0 * s0 - s0_squared;
    let p2 = (s0_squared - s0) / 2.0;
    let p = [1.0 - p1 - p2, p1, p2];
    if p.iter().any(|&x| x < -NEGATIVE_TOL) {
        return Err(Error::NotPhysical(alloc::format!(
            "photon-number moments imply probabilities {p:?}"
        )));
    }
    Ok(p.map(|x| x.max(0.0)))
}

/// Per-manifold Stokes vectors `(s_1, s_2)` from `<S_j>` and `<S_j^3>`;
/// `None` where the manifold is empty.
pub fn split_first_moments(
    first: &[f64; 3],
    third: &[f64; 3],
    p: &[f64; 3],
) -> (Option<[f64; 3]>, Option<[f64; 3]>) {
    let one = (p[1] > PRESENT_TOL).then(|| core::array::from_fn(|j| (4.0 * first[j] - third[j]) / (3.0 * p[1])));
    let two = (p[2] > PRESENT_TOL).then(|| core::array::from_fn(|j| (third[j] - first[j]) / (3.0 * p[2])));
    (one, two)
}

/// Two-photon `<S_n^2>_2` on the icosahedral lines, using `S_n^2 = 1` on the
/// one-photon manifold.
pub fn split_second_moments(second: &[f64; 5], p: &[f64; 3]) -> Option<[f64; 5]> {
    (p[2] > PRESENT_TOL).then(|| second.map(|q| (q - p[1]) / p[2]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonResolvedResult {
    /// `(p0, p1, p2)`.
    pub probabilities: [f64; 3],
    pub stokes_one: Option<[f64; 3]>,
    pub stokes_two: Option<[f64; 3]>,
    /// Second-order components of the two-photon manifold.
    pub second_order_two: Option<MomentComponents>,
    /// Photon-number-averaged second-order components.
    pub averaged_second_order: MomentComponents,
    pub rho_one: Option<ManifoldState>,
    pub rho_two: Option<ManifoldState>,
}

fn first_order(s: &[f64; 3], photons: usize) -> Result<MomentComponents> {
    MomentComponents::new(1, Some(photons), alloc::vec![s[2], s[1], s[0]])
}

/// Full inversion of the averaged data.
pub fn non_resolved_pipeline(data: &AveragedData) -> Result<NonResolvedResult> {
    let p = manifold_probabilities(data.s0, data.s0_squared)?;
    let (stokes_one, stokes_two) = split_first_moments(&data.first, &data.third, &p);
    let second_order_two = split_second_moments(&data.second, &p).map(|q| closed_form_second_order(&q, 2));
    let casimir = data.s0_squared + 2.0 * data.s0;
    let averaged_second_order = closed_form_second_order_with_casimir(&data.second, casimir, None);
    let rho_one = match &stokes_one {
        Some(s) => {
            let t = assemble_all_tensors(&[first_order(s, 1)?], 1)?;
            Some(reconstruct_density(&t, 1)?.state)
        }
        None => None,
    };
    let rho_two = match (&stokes_two, &second_order_two) {
        (Some(s), Some(m2)) => {
            let t = assemble_all_tensors(&[first_order(s, 2)?, m2.clone()], 2)?;
            Some(reconstruct_density(&t, 2)?.state)
        }
        _ => None,
    };
    Ok(NonResolvedResult {
        probabilities: p,
        stokes_one,
        stokes_two,
        second_order_two,
        averaged_second_order,
        rho_one,
        rho_two,
    })
}

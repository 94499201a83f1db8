//! Two-mode states: single-manifold states, block-diagonal polarization
//! sectors and general states on a truncated Fock lattice, together with
//! the named state families and their closed-form Stokes profiles.

mod closed_form;
mod families;

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{su2_unitary, EulerAngles, ManifoldOperator};
use crate::linalg::{self, CMatrix, CVector};

pub use closed_form::{closed_form_profile, Family};
pub use families::{
    noon, single_photon_density, su2_coherent, tmsv, tmsv_pair_probability, transformed_twin_fock,
    twin_fock, two_mode_coherent, two_mode_coherent_lattice, two_photon_density,
    unpolarized_two_photon, TRUNCATION_BOUND,
};

/// Tolerance for Hermiticity and positivity of constructed densities.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Pure(CVector),
    Mixed(CMatrix),
}

/// A normalized state on the `N`-photon manifold, pure or mixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldState {
    photons: usize,
    repr: Repr,
}

impl ManifoldState {
    /// Pure state from amplitudes in [`crate::ManifoldBasis`] order; the
    /// norm must be one within `1e-10`.
    pub fn pure(photons: usize, amplitudes: CVector) -> Result<Self> {
        crate::fock::check_manifold(photons)?;
        if amplitudes.len() != photons + 1 {
            return Err(Error::DimensionMismatch {
                expected: photons + 1,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > PSD_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            photons,
            repr: Repr::Pure(amplitudes / linalg::re(norm)),
        })
    }

    /// Pure state from unnormalized amplitudes.
    pub fn pure_normalized(photons: usize, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm));
        }
        Self::pure(photons, amplitudes / linalg::re(norm))
    }

    /// Mixed state; the matrix must be Hermitian, unit-trace and positive
    /// semidefinite within `1e-10`.
    pub fn mixed(photons: usize, density: CMatrix) -> Result<Self> {
        crate::fock::check_manifold(photons)?;
        let dim = photons + 1;
        if density.nrows() != dim || density.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: density.nrows(),
            });
        }
        if !linalg::is_hermitian(&density, PSD_TOL) {
            return Err(Error::NotPhysical("density matrix is not Hermitian".into()));
        }
        let tr = linalg::trace(&density).re;
        if (tr - 1.0).abs() > PSD_TOL {
            return Err(Error::NotNormalized(tr));
        }
        let min = linalg::min_eigenvalue(&density);
        if min < -PSD_TOL {
            return Err(Error::NotPhysical(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(Self {
            photons,
            repr: Repr::Mixed(linalg::hermitize(&density)),
        })
    }

    /// Basis state `|N-k, k>`.
    pub fn basis_state(photons: usize, k: usize) -> Result<Self> {
        crate::fock::check_manifold(photons)?;
        if k > photons {
            return Err(Error::InvalidParameter(format!(
                "basis index {k} outside manifold N={photons}"
            )));
        }
        let mut v = CVector::zeros(photons + 1);
        v[k] = linalg::re(1.0);
        Ok(Self {
            photons,
            repr: Repr::Pure(v),
        })
    }

    /// Fock state `|n_H, n_V>`. Not checked against the manifold cap.
    pub fn fock(horizontal: usize, vertical: usize) -> Self {
        let photons = horizontal + vertical;
        let mut v = CVector::zeros(photons + 1);
        v[vertical] = linalg::re(1.0);
        Self {
            photons,
            repr: Repr::Pure(v),
        }
    }

    pub fn vacuum() -> Self {
        Self::fock(0, 0)
    }

    /// Maximally mixed state `1/(N+1)` on the manifold. Not checked against
    /// the manifold cap.
    pub fn maximally_mixed(photons: usize) -> Self {
        let dim = photons + 1;
        Self {
            photons,
            repr: Repr::Mixed(CMatrix::identity(dim, dim) * linalg::re(1.0 / dim as f64)),
        }
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn dim(&self) -> usize {
        self.photons + 1
    }

    pub fn is_pure_representation(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&CVector> {
        match &self.repr {
            Repr::Pure(v) => Some(v),
            Repr::Mixed(_) => None,
        }
    }

    pub fn density(&self) -> CMatrix {
        match &self.repr {
            Repr::Pure(v) => v * v.adjoint(),
            Repr::Mixed(m) => m.clone(),
        }
    }

    /// `Tr(rho A)`.
    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        match &self.repr {
            Repr::Pure(v) => (v.adjoint() * op * v)[(0, 0)],
            Repr::Mixed(m) => linalg::trace_of_product(m, op),
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.repr {
            Repr::Pure(_) => 1.0,
            Repr::Mixed(m) => linalg::purity(m),
        }
    }

    /// `U rho U^dagger` (or `U psi`) for a unitary on the same manifold.
    pub fn transformed(&self, u: &ManifoldOperator) -> Result<Self> {
        if u.photons() != self.photons {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        let repr = match &self.repr {
            Repr::Pure(v) => Repr::Pure(u.apply(v)),
            Repr::Mixed(m) => Repr::Mixed(linalg::hermitize(&u.conjugate(m))),
        };
        Ok(Self {
            photons: self.photons,
            repr,
        })
    }

    pub fn apply_su2(&self, angles: &EulerAngles) -> Result<Self> {
        self.transformed(&su2_unitary(angles, self.photons)?)
    }

    /// Overlap-free comparison: trace distance between the two densities.
    pub fn trace_distance(&self, other: &ManifoldState) -> Result<f64> {
        if other.photons != self.photons {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(linalg::trace_distance(&self.density(), &other.density()))
    }
}

/// One manifold of a block-diagonal state.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub probability: f64,
    pub state: ManifoldState,
}

impl Block {
    pub fn photons(&self) -> usize {
        self.state.photons()
    }
}

/// Polarization sector: photon-number distribution `p_N` and a normalized
/// state per populated manifold, sorted by `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonalState {
    blocks: Vec<Block>,
    truncation_deficit: f64,
}

impl BlockDiagonalState {
    /// Probabilities must be positive and sum to one within `1e-12`; each
    /// manifold may appear once.
    pub fn new(mut blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParameter("a state needs at least one manifold".into()));
        }
        blocks.sort_by_key(Block::photons);
        for pair in blocks.windows(2) {
            if pair[0].photons() == pair[1].photons() {
                return Err(Error::DuplicateManifold(pair[0].photons()));
            }
        }
        let mut total = 0.0;
        for b in &blocks {
            if !(b.probability > 0.0 && b.probability.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "manifold N={} has non-positive probability {}",
                    b.photons(),
                    b.probability
                )));
            }
            total += b.probability;
        }
        if (total - 1.0).abs() > crate::NORM_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self {
            blocks,
            truncation_deficit: 0.0,
        })
    }

    /// Builds a state from weights that are renormalized; the removed mass
    /// `1 - sum(weights)` is kept as the truncation deficit.
    pub(crate) fn from_truncated(weighted: Vec<(f64, ManifoldState)>) -> Result<Self> {
        let kept: f64 = weighted.iter().map(|(p, _)| p).sum();
        let blocks = weighted
            .into_iter()
            .filter(|(p, _)| *p > 0.0)
            .map(|(p, state)| Block {
                probability: p / kept,
                state,
            })
            .collect();
        let mut out = Self::new(blocks)?;
        out.truncation_deficit = (1.0 - kept).max(0.0);
        Ok(out)
    }

    pub fn single(state: ManifoldState) -> Self {
        Self {
            blocks: alloc::vec![Block {
                probability: 1.0,
                state,
            }],
            truncation_deficit: 0.0,
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, photons: usize) -> Option<&Block> {
        self.blocks.iter().find(|b| b.photons() == photons)
    }

    /// `p_N`, zero for manifolds that are not populated.
    pub fn probability(&self, photons: usize) -> f64 {
        self.block(photons).map_or(0.0, |b| b.probability)
    }

    pub fn manifolds(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::photons).collect()
    }

    pub fn max_photons(&self) -> usize {
        self.blocks.last().map_or(0, Block::photons)
    }

    /// Probability mass discarded by truncation before renormalizing.
    pub fn truncation_deficit(&self) -> f64 {
        self.truncation_deficit
    }

    /// `<S_0^k> = sum_N p_N N^k`.
    pub fn photon_moment(&self, k: usize) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.probability * linalg::powi(b.photons() as f64, k))
            .sum()
    }

    pub fn mean_photons(&self) -> f64 {
        self.photon_moment(1)
    }

    /// `sum_N p_N Tr(rho_N A_N)` for a per-manifold operator family.
    pub fn averaged<F>(&self, mut op: F) -> Result<f64>
    where
        F: FnMut(usize) -> Result<CMatrix>,
    {
        let mut acc = 0.0;
        for b in &self.blocks {
            acc += b.probability * b.state.expectation(&op(b.photons())?).re;
        }
        Ok(acc)
    }

    pub fn apply_su2(&self, angles: &EulerAngles) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                Ok(Block {
                    probability: b.probability,
                    state: b.state.apply_su2(angles)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            blocks,
            truncation_deficit: self.truncation_deficit,
        })
    }
}

impl From<ManifoldState> for BlockDiagonalState {
    fn from(state: ManifoldState) -> Self {
        Self::single(state)
    }
}

/// Offset of manifold `N` in the lattice ordering (by `N`, then by `k`).
pub fn lattice_offset(photons: usize) -> usize {
    photons * (photons + 1) / 2
}

/// Number of lattice points `{|n_H, n_V> : n_H + n_V <= N_max}`.
pub fn lattice_dim(max_photons: usize) -> usize {
    lattice_offset(max_photons + 1)
}

/// Two-mode state on the truncated Fock lattice `n_H + n_V <= N_max`,
/// ordered by total photon number and then by vertical count.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralTwoModeState {
    max_photons: usize,
    repr: Repr,
    truncation_deficit: f64,
}

impl GeneralTwoModeState {
    pub fn pure(max_photons: usize, amplitudes: CVector) -> Result<Self> {
        Self::pure_truncated(max_photons, amplitudes, 0.0)
    }

    pub(crate) fn pure_truncated(
        max_photons: usize,
        amplitudes: CVector,
        truncation_deficit: f64,
    ) -> Result<Self> {
        let dim = lattice_dim(max_photons);
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > PSD_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            max_photons,
            repr: Repr::Pure(amplitudes / linalg::re(norm)),
            truncation_deficit,
        })
    }

    pub fn mixed(max_photons: usize, density: CMatrix) -> Result<Self> {
        let dim = lattice_dim(max_photons);
        if density.nrows() != dim || density.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: density.nrows(),
            });
        }
        if !linalg::is_hermitian(&density, PSD_TOL) {
            return Err(Error::NotPhysical("density matrix is not Hermitian".into()));
        }
        let tr = linalg::trace(&density).re;
        if (tr - 1.0).abs() > PSD_TOL {
            return Err(Error::NotNormalized(tr));
        }
        Ok(Self {
            max_photons,
            repr: Repr::Mixed(density),
            truncation_deficit: 0.0,
        })
    }

    /// Lattice index of `|n_H, n_V>`.
    pub fn index(horizontal: usize, vertical: usize) -> usize {
        lattice_offset(horizontal + vertical) + vertical
    }

    pub fn max_photons(&self) -> usize {
        self.max_photons
    }

    pub fn truncation_deficit(&self) -> f64 {
        self.truncation_deficit
    }

    pub fn density(&self) -> CMatrix {
        match &self.repr {
            Repr::Pure(v) => v * v.adjoint(),
            Repr::Mixed(m) => m.clone(),
        }
    }

    /// Applies `U(angles)` manifold by manifold.
    pub fn apply_su2(&self, angles: &EulerAngles) -> Result<Self> {
        let dim = lattice_dim(self.max_photons);
        let mut u = CMatrix::zeros(dim, dim);
        for n in 0..=self.max_photons {
            let block = su2_unitary(angles, n)?;
            let o = lattice_offset(n);
            u.view_mut((o, o), (n + 1, n + 1)).copy_from(block.matrix());
        }
        let repr = match &self.repr {
            Repr::Pure(v) => Repr::Pure(&u * v),
            Repr::Mixed(m) => Repr::Mixed(&u * m * u.adjoint()),
        };
        Ok(Self {
            max_photons: self.max_photons,
            repr,
            truncation_deficit: self.truncation_deficit,
        })
    }
}

/// Block-diagonal projection: `p_N = Tr(1_N rho)` and
/// `rho_N = 1_N rho 1_N / p_N` for every manifold with `p_N > 0`.
pub fn polarization_sector(state: &GeneralTwoModeState) -> Result<BlockDiagonalState> {
    let mut weighted = Vec::new();
    for n in 0..=state.max_photons {
        let o = lattice_offset(n);
        let d = n + 1;
        match &state.repr {
            Repr::Pure(v) => {
                let part = v.rows(o, d).into_owned();
                let p = part.norm_squared();
                if p > 0.0 {
                    let amps = part / linalg::re(Float::sqrt(p));
                    weighted.push((p, ManifoldState::pure(n, amps)?));
                }
            }
            Repr::Mixed(m) => {
                let part = m.view((o, o), (d, d)).into_owned();
                let p = linalg::trace(&part).re;
                if p > 0.0 {
                    weighted.push((p, ManifoldState::mixed(n, part / linalg::re(p))?));
                }
            }
        }
    }
    let total: f64 = weighted.iter().map(|(p, _)| p).sum();
    let blocks = weighted
        .into_iter()
        .map(|(p, state)| Block {
            probability: p / total,
            state,
        })
        .collect();
    let mut out = BlockDiagonalState::new(blocks)?;
    out.truncation_deficit = state.truncation_deficit;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};
    use std::vec;

    #[test]
    fn constructors_validate() {
        assert!(matches!(
            ManifoldState::pure(1, CVector::from_vec(vec![re(1.0), re(1.0)])),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            ManifoldState::pure(2, CVector::from_vec(vec![re(1.0)])),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = CMatrix::from_row_slice(2, 2, &[re(1.2), re(0.0), re(0.0), re(-0.2)]);
        assert!(matches!(ManifoldState::mixed(1, bad), Err(Error::NotPhysical(_))));
        let nonherm = CMatrix::from_row_slice(2, 2, &[re(0.5), c(0.0, 0.1), c(0.0, 0.1), re(0.5)]);
        assert!(ManifoldState::mixed(1, nonherm).is_err());
    }

    #[test]
    fn block_state_validates() {
        let b = |n: usize, p: f64| Block {
            probability: p,
            state: ManifoldState::basis_state(n, 0).unwrap(),
        };
        assert_eq!(
            BlockDiagonalState::new(vec![b(1, 0.5), b(1, 0.5)]),
            Err(Error::DuplicateManifold(1))
        );
        assert!(matches!(
            BlockDiagonalState::new(vec![b(1, 0.5), b(2, 0.4)]),
            Err(Error::NotNormalized(_))
        ));
        assert!(BlockDiagonalState::new(vec![b(1, 1.0), b(2, 0.0)]).is_err());
        let s = BlockDiagonalState::new(vec![b(3, 0.25), b(1, 0.75)]).unwrap();
        assert_eq!(s.manifolds(), vec![1, 3]);
        assert_eq!(s.probability(2), 0.0);
        assert!((s.mean_photons() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn sector_of_pure_fock_state() {
        let mut v = CVector::zeros(lattice_dim(3));
        v[GeneralTwoModeState::index(2, 0)] = re(1.0);
        let s = polarization_sector(&GeneralTwoModeState::pure(3, v).unwrap()).unwrap();
        assert_eq!(s.blocks().len(), 1);
        assert_eq!(s.blocks()[0].photons(), 2);
        assert_eq!(s.blocks()[0].probability, 1.0);
        assert_eq!(s.blocks()[0].state, ManifoldState::fock(2, 0));
    }

    #[test]
    fn sector_drops_coherences_between_manifolds() {
        let mut v = CVector::zeros(lattice_dim(2));
        v[GeneralTwoModeState::index(1, 0)] = re(0.6);
        v[GeneralTwoModeState::index(1, 1)] = c(0.0, 0.8);
        let pure = GeneralTwoModeState::pure(2, v).unwrap();
        let mixed = GeneralTwoModeState::mixed(2, pure.density()).unwrap();
        for st in [&pure, &mixed] {
            let s = polarization_sector(st).unwrap();
            assert_eq!(s.manifolds(), vec![1, 2]);
            assert!((s.probability(1) - 0.36).abs() < 1e-15);
            assert!((s.probability(2) - 0.64).abs() < 1e-15);
        }
    }

    #[test]
    fn lattice_apply_matches_blockwise() {
        let mut v = CVector::zeros(lattice_dim(2));
        v[GeneralTwoModeState::index(1, 0)] = re(0.6);
        v[GeneralTwoModeState::index(2, 0)] = re(0.8);
        let a = EulerAngles::new(0.4, 1.2, -0.3);
        let st = GeneralTwoModeState::pure(2, v).unwrap();
        let left = polarization_sector(&st.apply_su2(&a).unwrap()).unwrap();
        let right = polarization_sector(&st).unwrap().apply_su2(&a).unwrap();
        for (x, y) in left.blocks().iter().zip(right.blocks()) {
            assert!((x.probability - y.probability).abs() < 1e-14);
            assert!(x.state.trace_distance(&y.state).unwrap() < 1e-12);
        }
    }
}
